#pragma once

// Exact cosine top-k over an id-keyed vector set. Corpora stay at desk
// scale, so a full scan behind the index interface beats approximate
// structures. Ties break on ascending id.

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sqlscout/embedding.hpp"
#include "sqlscout/errors.hpp"

namespace sqlscout {

class VectorIndex {
public:
    struct Hit {
        std::string id;
        double score;

        bool operator==(const Hit&) const = default;
    };

    explicit VectorIndex(int dimension) : dim_(dimension) {
        if (dimension <= 0) throw Error("vector index: dimension must be positive");
    }

    int dimension() const { return dim_; }
    std::size_t size() const { return entries_.size(); }

    // Insertion requires exclusive access; reads are safe to share.
    void insert(std::string id, std::vector<double> vec) {
        if (static_cast<int>(vec.size()) != dim_)
            throw Error("vector index: vector dimension " + std::to_string(vec.size()) +
                        " != index dimension " + std::to_string(dim_));
        if (!ids_.insert(id).second)
            throw Error("vector index: duplicate id \"" + id + "\"");
        entries_.push_back(Entry{std::move(id), std::move(vec)});
    }

    std::vector<Hit> top_k(std::span<const double> query, int k) const {
        std::vector<Hit> hits;
        if (k <= 0 || entries_.empty()) return hits;
        hits.reserve(entries_.size());
        for (const auto& e : entries_)
            hits.push_back(Hit{e.id, cosine_similarity(query, e.vec)});
        std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (static_cast<std::size_t>(k) < hits.size()) hits.resize(static_cast<std::size_t>(k));
        return hits;
    }

private:
    struct Entry {
        std::string id;
        std::vector<double> vec;
    };

    int dim_;
    std::vector<Entry> entries_;
    std::set<std::string> ids_;
};

}  // namespace sqlscout

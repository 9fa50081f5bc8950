#include "subgcache/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "subgcache/errors.hpp"

namespace subgcache {

Linkage linkage_from_string(const std::string& name) {
    if (name == "ward") return Linkage::Ward;
    if (name == "single") return Linkage::Single;
    if (name == "average") return Linkage::Average;
    if (name == "complete") return Linkage::Complete;
    if (name == "centroid") return Linkage::Centroid;
    throw DomainError("unknown linkage: " + name);
}

std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::Ward: return "ward";
        case Linkage::Single: return "single";
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
        case Linkage::Centroid: return "centroid";
    }
    return "?";
}

std::vector<double> pairwise_distances(const std::vector<EmbeddingVec>& embs) {
    size_t m = embs.size();
    if (m == 0) throw DomainError("pairwise_distances: need at least one embedding");
    std::vector<double> d(m * m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
            double v = euclidean_distance(embs[i], embs[j]);  // checks dims
            d[i * m + j] = v;
            d[j * m + i] = v;
        }
    }
    return d;
}

namespace {

// Working state indexed by cluster slot; a merge keeps the slot whose min
// member index is smaller and kills the other.
struct Slots {
    std::vector<bool> alive;
    std::vector<uint32_t> size;
    std::vector<uint32_t> min_member;
    std::vector<std::vector<uint32_t>> members;
};

}  // namespace

ClusterAssignment agglomerate(const std::vector<EmbeddingVec>& embs, const ClusterConfig& cfg) {
    size_t m = embs.size();
    if (cfg.cluster_count < 1) throw DomainError("cluster count must be >= 1");
    if (cfg.cluster_count > m) {
        throw DomainError("cluster count " + std::to_string(cfg.cluster_count) +
                          " exceeds point count " + std::to_string(m));
    }

    bool squared = cfg.linkage == Linkage::Ward || cfg.linkage == Linkage::Centroid;
    std::vector<double> dist = pairwise_distances(embs);
    ClusterAssignment out;
    out.op_count = m * (m - 1) / 2 * (embs.empty() ? 0 : embs[0].size());
    if (squared) {
        for (double& v : dist) v *= v;
    }

    Slots s;
    s.alive.assign(m, true);
    s.size.assign(m, 1);
    s.min_member.resize(m);
    s.members.resize(m);
    for (size_t i = 0; i < m; ++i) {
        s.min_member[i] = static_cast<uint32_t>(i);
        s.members[i] = {static_cast<uint32_t>(i)};
    }

    auto d_at = [&](size_t i, size_t j) -> double& { return dist[i * m + j]; };

    size_t active = m;
    while (active > cfg.cluster_count) {
        // Closest alive pair; ties by (min member of left, min member of right)
        // where left holds the smaller min member.
        double best = std::numeric_limits<double>::infinity();
        size_t bi = m, bj = m;
        uint32_t bkey0 = 0, bkey1 = 0;
        for (size_t i = 0; i < m; ++i) {
            if (!s.alive[i]) continue;
            for (size_t j = i + 1; j < m; ++j) {
                if (!s.alive[j]) continue;
                ++out.op_count;
                double v = d_at(i, j);
                uint32_t k0 = std::min(s.min_member[i], s.min_member[j]);
                uint32_t k1 = std::max(s.min_member[i], s.min_member[j]);
                if (v < best || (v == best && (k0 < bkey0 || (k0 == bkey0 && k1 < bkey1)))) {
                    best = v;
                    bi = i;
                    bj = j;
                    bkey0 = k0;
                    bkey1 = k1;
                }
            }
        }

        size_t keep = s.min_member[bi] < s.min_member[bj] ? bi : bj;
        size_t kill = keep == bi ? bj : bi;
        double na = s.size[keep], nb = s.size[kill];

        MergeStep step;
        step.left = s.members[keep];
        step.right = s.members[kill];
        switch (cfg.linkage) {
            case Linkage::Ward: step.distance = best / 2.0; break;      // variance increase
            case Linkage::Centroid: step.distance = std::sqrt(best); break;
            default: step.distance = best;
        }
        out.merges.push_back(std::move(step));

        // Lance-Williams update of distances to every other alive cluster.
        for (size_t k = 0; k < m; ++k) {
            if (!s.alive[k] || k == keep || k == kill) continue;
            ++out.op_count;
            double dak = d_at(keep, k), dbk = d_at(kill, k), dab = d_at(keep, kill);
            double nk = s.size[k];
            double v = 0;
            switch (cfg.linkage) {
                case Linkage::Single: v = std::min(dak, dbk); break;
                case Linkage::Complete: v = std::max(dak, dbk); break;
                case Linkage::Average: v = (na * dak + nb * dbk) / (na + nb); break;
                case Linkage::Centroid:
                    v = (na * dak + nb * dbk) / (na + nb) -
                        (na * nb * dab) / ((na + nb) * (na + nb));
                    break;
                case Linkage::Ward:
                    v = ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk);
                    break;
            }
            d_at(keep, k) = v;
            d_at(k, keep) = v;
        }

        s.alive[kill] = false;
        s.size[keep] += s.size[kill];
        s.min_member[keep] = std::min(s.min_member[keep], s.min_member[kill]);
        std::vector<uint32_t> merged;
        merged.reserve(s.members[keep].size() + s.members[kill].size());
        std::merge(s.members[keep].begin(), s.members[keep].end(), s.members[kill].begin(),
                   s.members[kill].end(), std::back_inserter(merged));
        s.members[keep] = std::move(merged);
        s.members[kill].clear();
        --active;
    }

    // Label clusters by ascending min member index.
    std::vector<size_t> order;
    for (size_t i = 0; i < m; ++i) {
        if (s.alive[i]) order.push_back(i);
    }
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return s.min_member[a] < s.min_member[b]; });
    out.labels.assign(m, 0);
    for (uint32_t label = 0; label < order.size(); ++label) {
        for (uint32_t member : s.members[order[label]]) out.labels[member] = label;
    }
    return out;
}

std::string merge_trace_json(const ClusterAssignment& a) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const MergeStep& st : a.merges) {
        nlohmann::ordered_json j;
        j["left"] = st.left;
        j["right"] = st.right;
        j["distance"] = st.distance;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

}  // namespace subgcache

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subgcache/encoders.hpp"

namespace subgcache {

enum class Linkage { Ward, Single, Average, Complete, Centroid };

Linkage linkage_from_string(const std::string& name);
std::string to_string(Linkage l);

struct ClusterConfig {
    Linkage linkage = Linkage::Ward;
    uint32_t cluster_count = 1;  // c; must satisfy 1 <= c <= m at cut time
};

struct MergeStep {
    std::vector<uint32_t> left;   // member indices, sorted; min(left) < min(right)
    std::vector<uint32_t> right;
    double distance = 0.0;  // linkage value at which the merge occurred
};

struct ClusterAssignment {
    std::vector<uint32_t> labels;  // length m, values in [0, c); clusters
                                   // numbered by ascending min member index
    std::vector<MergeStep> merges;
    uint64_t op_count = 0;  // distance evals + recurrence updates + scan steps
};

// Symmetric m x m Euclidean distance matrix (row-major, zero diagonal).
std::vector<double> pairwise_distances(const std::vector<EmbeddingVec>& embs);

// Agglomerative clustering via the Lance-Williams recurrence. Starts from m
// singletons and merges the closest pair under the configured linkage until
// exactly c clusters remain. Ties are broken by the lexicographically
// smallest (min member index of left, min member index of right). Ward and
// centroid run on squared distances internally; ward's reported merge
// distance is the variance increase, centroid's the distance between
// centroids.
ClusterAssignment agglomerate(const std::vector<EmbeddingVec>& embs, const ClusterConfig& cfg);

// Merge trace as a JSON array string, for dendrogram inspection.
std::string merge_trace_json(const ClusterAssignment& a);

}  // namespace subgcache

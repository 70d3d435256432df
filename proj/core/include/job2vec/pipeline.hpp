#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "job2vec/cmvae.hpp"
#include "job2vec/embedding.hpp"
#include "job2vec/ingest.hpp"
#include "job2vec/jobgraph.hpp"

namespace job2vec {

// Aggregates titles over the records' own word frequencies, extracts each
// person's transitions and counts them into a Job-Graph.
JobGraph graph_from_records(std::span<const CareerRecord> records, std::size_t min_freq);

// The evaluated vector tables of a trained model: the fused representation
// ("job2vec") and the topology-only and semantic-only ablations.
std::vector<std::pair<std::string, EmbeddingTable>> model_variants(const JointResult& result);

// Fused vectors recomputed from view tables and a fusion network.
EmbeddingTable fuse(const ViewEmbeddings& views, const FusionNet& net);

}  // namespace job2vec

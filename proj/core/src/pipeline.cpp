#include "job2vec/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "job2vec/titlenorm.hpp"

namespace job2vec {

JobGraph graph_from_records(std::span<const CareerRecord> records, std::size_t min_freq) {
  auto aggregator = TitleAggregator::from_records(records, min_freq);
  auto transitions =
      extract_transitions(records, [&](const CareerRecord& r) { return aggregator.key(r); });
  return build_graph(transitions);
}

std::vector<std::pair<std::string, EmbeddingTable>> model_variants(const JointResult& result) {
  return {{"job2vec", result.fused}, {"topology", result.views.e}, {"semantic", result.views.s}};
}

EmbeddingTable fuse(const ViewEmbeddings& views, const FusionNet& net) {
  const std::size_t width = views.e.dim() + views.s.dim() + views.b.dim() + views.d.dim();
  if (width != net.input_dim())
    throw std::invalid_argument("fusion network input does not match the view dimensions");
  Eigen::MatrixXd codes = encode(net, assemble_inputs(views));
  EmbeddingTable out(static_cast<std::size_t>(codes.cols()), static_cast<std::size_t>(codes.rows()));
  auto data = out.data();
  // Column-major codes are node-major, the layout of the table.
  std::copy(codes.data(), codes.data() + codes.size(), data.begin());
  return out;
}

}  // namespace job2vec

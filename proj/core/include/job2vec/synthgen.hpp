#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "job2vec/ingest.hpp"
#include "job2vec/types.hpp"

namespace job2vec {

struct SynthConfig {
  int n_companies = 10;
  int n_levels = 5;
  int n_functions = 8;
  int n_persons = 5000;
  double mean_tenure_years = 2.0;
  // Chance that a move keeps the level and switches company.
  double lateral_move_prob = 0.6;
  // Promotions are preceded by tenures this many times longer than lateral moves.
  double promote_tenure_factor = 2.5;
  // Chance that a title carries a one-off decorator word.
  double noise_word_prob = 0.1;
  // Chance that a move also switches function.
  double function_switch_prob = 0.05;
  // Companies form consecutive peer groups of this size; a lateral move goes
  // to another member of the group with probability peer_move_prob and to a
  // uniformly chosen other company otherwise.
  int peer_group_size = 2;
  double peer_move_prob = 0.5;
  int min_records = 2;
  int max_records = 6;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument on counts < 1 or probabilities outside [0, 1].
  void validate() const;
};

struct TitleClass {
  int function = 0;
  int level = 0;

  friend auto operator<=>(const TitleClass&, const TitleClass&) = default;
};

// Planted (function, level) of every title the generator can emit, keyed by
// the clean normalized title and company.
class GroundTruth {
 public:
  void add(const NodeKey& key, TitleClass cls);
  std::optional<TitleClass> find(const NodeKey& key) const;
  bool same_level(const NodeKey& a, const NodeKey& b) const;
  const std::map<NodeKey, TitleClass>& entries() const { return entries_; }

 private:
  std::map<NodeKey, TitleClass> entries_;
};

struct SynthMove {
  std::size_t from_record = 0;  // index into SynthOutput::records
  bool lateral = false;
  int src_tenure_months = 0;
};

struct SynthOutput {
  std::vector<CareerRecord> records;
  GroundTruth truth;
  std::vector<SynthMove> moves;
};

// Name of the company with the given index.
std::string company_name(int index);

// Career trajectories over companies with their own level naming. Levels never
// decrease; a lateral move switches company at equal level.
SynthOutput generate(const SynthConfig& cfg);

// `title_norm company function level`, tab separated.
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

}  // namespace job2vec

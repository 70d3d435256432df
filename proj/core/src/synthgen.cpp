#include "job2vec/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "job2vec/embedding.hpp"

namespace job2vec {

void SynthConfig::validate() const {
  if (n_companies < 1 || n_levels < 1 || n_functions < 1 || n_persons < 1)
    throw std::invalid_argument("synthetic counts must be >= 1");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(lateral_move_prob) || !prob(noise_word_prob) || !prob(function_switch_prob) ||
      !prob(peer_move_prob))
    throw std::invalid_argument("synthetic probabilities must lie in [0, 1]");
  if (!(mean_tenure_years > 0.0)) throw std::invalid_argument("mean tenure must be > 0");
  if (!(promote_tenure_factor > 1.0)) throw std::invalid_argument("promote_tenure_factor must be > 1");
  if (peer_group_size < 1) throw std::invalid_argument("peer_group_size must be >= 1");
  if (min_records < 1 || max_records < min_records)
    throw std::invalid_argument("record counts must satisfy 1 <= min <= max");
}

void GroundTruth::add(const NodeKey& key, TitleClass cls) { entries_[key] = cls; }

std::optional<TitleClass> GroundTruth::find(const NodeKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool GroundTruth::same_level(const NodeKey& a, const NodeKey& b) const {
  auto ca = find(a);
  auto cb = find(b);
  return ca && cb && ca->level == cb->level;
}

namespace {

const std::array<const char*, 15> kCompanies{
    "google", "facebook", "amazon", "microsoft", "apple", "ibm",   "linkedin", "cisco",
    "oracle", "airbnb",   "uber",   "yahoo",     "nokia", "intel", "hp"};

const std::array<const char*, 16> kFunctions{
    "software engineer",   "product manager",   "data scientist",      "sales representative",
    "financial analyst",   "marketing manager", "hardware engineer",   "program manager",
    "research scientist",  "support technician", "business analyst",  "technical recruiter",
    "ux designer",         "staff accountant",  "security architect", "network administrator"};

// Level words per naming dialect, lowest level first. A dialect marked
// `suffix` appends its level word to the function instead of prefixing it.
struct Dialect {
  std::array<const char*, 5> levels;
  bool suffix;
};

const std::array<Dialect, 5> kDialects{{
    {{"associate", "", "senior", "staff", "principal"}, false},
    {{"junior", "", "senior", "lead", "chief"}, false},
    {{"i", "ii", "iii", "iv", "v"}, true},
    {{"entry", "", "senior", "principal", "distinguished"}, false},
    {{"assistant", "", "senior", "lead", "head"}, false},
}};

const std::array<const char*, 20> kSyllables{"ka",  "lo",  "mi",  "ru",  "zen", "tor", "vex",
                                             "qui", "pha", "dro", "bel", "nix", "sol", "gar",
                                             "wen", "yul", "fim", "ost", "jub", "cre"};

std::string function_words(int f) {
  if (f < static_cast<int>(kFunctions.size())) return kFunctions[static_cast<std::size_t>(f)];
  return fmt::format("function{} specialist", f);
}

std::string level_word(int company, int level) {
  const auto& dialect = kDialects[static_cast<std::size_t>(company) % kDialects.size()];
  if (level < static_cast<int>(dialect.levels.size())) return dialect.levels[static_cast<std::size_t>(level)];
  return fmt::format("level{}", level);
}

std::string clean_title(int company, int function, int level) {
  const auto& dialect = kDialects[static_cast<std::size_t>(company) % kDialects.size()];
  std::string lw = level_word(company, level);
  std::string fw = function_words(function);
  if (lw.empty()) return fw;
  return dialect.suffix ? fw + " " + lw : lw + " " + fw;
}

std::string capitalize_words(const std::string& text) {
  std::string out = text;
  bool start = true;
  for (auto& ch : out) {
    if (start && std::isalpha(static_cast<unsigned char>(ch))) ch = static_cast<char>(std::toupper(ch));
    start = ch == ' ';
  }
  return out;
}

// Pronounceable one-off word for the n-th decorator.
std::string decorator_word(std::size_t n) {
  std::string word = "ve";
  do {
    word += kSyllables[n % kSyllables.size()];
    n /= kSyllables.size();
  } while (n > 0);
  return word;
}

std::vector<std::string> split_title(const std::string& title) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : title) {
    if (ch == ' ') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace

std::string company_name(int index) {
  if (index >= 0 && index < static_cast<int>(kCompanies.size()))
    return kCompanies[static_cast<std::size_t>(index)];
  return fmt::format("company{}", index);
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthOutput out;
  for (int c = 0; c < cfg.n_companies; ++c)
    for (int f = 0; f < cfg.n_functions; ++f)
      for (int l = 0; l < cfg.n_levels; ++l)
        out.truth.add(NodeKey{split_title(clean_title(c, f, l)), company_name(c)}, {f, l});

  Rng rng(cfg.seed);
  std::uniform_int_distribution<int> pick_company(0, cfg.n_companies - 1);
  std::uniform_int_distribution<int> pick_function(0, cfg.n_functions - 1);
  std::uniform_int_distribution<int> pick_records(cfg.min_records, cfg.max_records);
  std::uniform_int_distribution<int> pick_start_offset(0, 12 * 8);
  std::uniform_int_distribution<int> pick_style(0, 2);
  std::bernoulli_distribution lateral(cfg.lateral_move_prob);
  std::bernoulli_distribution decorate(cfg.noise_word_prob);
  std::bernoulli_distribution switch_function(cfg.function_switch_prob);
  std::bernoulli_distribution stay_in_company(0.5);
  std::bernoulli_distribution still_there(0.2);
  std::bernoulli_distribution to_peer(cfg.peer_move_prob);
  std::gamma_distribution<double> tenure_shape(4.0, cfg.mean_tenure_years / 4.0);
  // Lower levels are more common as entry points.
  std::vector<double> level_weights;
  for (int l = 0; l < cfg.n_levels; ++l) level_weights.push_back(std::pow(0.7, l));
  std::discrete_distribution<int> pick_level(level_weights.begin(), level_weights.end());

  std::set<std::string> vocabulary;
  for (const auto& [key, cls] : out.truth.entries())
    vocabulary.insert(key.title.begin(), key.title.end());
  std::size_t next_decorator = 0;
  auto fresh_decorator = [&] {
    std::string word;
    do {
      word = decorator_word(next_decorator++);
    } while (vocabulary.contains(word));
    return capitalize_words(word);
  };

  auto tenure_months = [&](bool promotion) {
    double years = tenure_shape(rng) * (promotion ? cfg.promote_tenure_factor : 1.0);
    return std::max(1, static_cast<int>(std::lround(years * 12.0)));
  };

  for (int p = 0; p < cfg.n_persons; ++p) {
    const std::string person = fmt::format("p{:06}", p);
    int company = pick_company(rng);
    int function = pick_function(rng);
    int level = pick_level(rng);
    const int n_records = pick_records(rng);
    YearMonth start = YearMonth(1998, 1).plus_months(pick_start_offset(rng));

    for (int r = 0; r < n_records; ++r) {
      // Decide the next move first: its kind sets how long this job is held.
      bool last = r + 1 == n_records;
      bool next_lateral = lateral(rng);
      if (!last && !next_lateral && level + 1 >= cfg.n_levels) last = true;
      if (!last && next_lateral && cfg.n_companies < 2) last = true;

      int held = last ? tenure_months(false) : tenure_months(!next_lateral);
      YearMonth end = start.plus_months(held);

      std::string title = capitalize_words(clean_title(company, function, level));
      if (decorate(rng)) {
        switch (pick_style(rng)) {
          case 0: title = fresh_decorator() + " " + title; break;
          case 1: title += " (" + fresh_decorator() + ")"; break;
          default: title += " - " + fresh_decorator(); break;
        }
      }
      CareerRecord record{person, title, company_name(company), start, end, false};
      if (last && still_there(rng)) record.end_is_present = true;
      out.records.push_back(record);
      if (last) break;

      out.moves.push_back({out.records.size() - 1, next_lateral, held});
      if (next_lateral) {
        const int group_begin = company / cfg.peer_group_size * cfg.peer_group_size;
        const int group_end = std::min(group_begin + cfg.peer_group_size, cfg.n_companies);
        int other = company;
        if (group_end - group_begin > 1 && to_peer(rng)) {
          std::uniform_int_distribution<int> peer(group_begin, group_end - 1);
          while (other == company) other = peer(rng);
        } else {
          while (other == company) other = pick_company(rng);
        }
        company = other;
      } else {
        ++level;
        if (!stay_in_company(rng) && cfg.n_companies > 1) {
          int other = pick_company(rng);
          while (other == company) other = pick_company(rng);
          company = other;
        }
      }
      if (cfg.n_functions > 1 && switch_function(rng)) {
        int other = pick_function(rng);
        while (other == function) other = pick_function(rng);
        function = other;
      }
      start = end;
    }
  }

  // Present rows end at the snapshot the parser would pick.
  YearMonth snapshot;
  bool any_concrete = false;
  for (const auto& r : out.records)
    if (!r.end_is_present) {
      snapshot = any_concrete ? std::max(snapshot, r.end) : r.end;
      any_concrete = true;
    }
  for (auto& r : out.records)
    if (r.end_is_present) r.end = any_concrete ? std::max(snapshot, r.start) : r.start;
  return out;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  for (const auto& [key, cls] : truth.entries())
    out << key.title_text() << '\t' << key.company << '\t' << cls.function << '\t' << cls.level
        << '\n';
}

}  // namespace job2vec

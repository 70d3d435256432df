#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace job2vec {

using NodeId = std::uint32_t;
using WordId = std::uint32_t;

// A job title affiliated with a company. The title is the normalized word
// sequence produced by title aggregation.
struct NodeKey {
  std::vector<std::string> title;
  std::string company;

  std::string title_text() const;
  // "title words@company", the form used by the predict command.
  std::string label() const;

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

std::string join_words(const std::vector<std::string>& words, char sep = ' ');
std::vector<std::string> split_words(const std::string& text, char sep = ' ');

}  // namespace job2vec

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "comprank/error.hpp"
#include "comprank/model.hpp"

namespace comprank {

namespace detail {

inline nlohmann::json parse_record(const std::string& line, const std::filesystem::path& path,
                                   std::size_t line_no) {
  nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    throw Error(ErrorKind::Parse,
                path.string() + ":" + std::to_string(line_no) + ": malformed record");
  }
  return record;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  }
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  }
  return out;
}

inline bool is_blank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace detail

/// Items file: one JSON record per line with fields `id` (string, required),
/// `text` (string, required), `score` (number, optional). Blank lines are
/// ignored.
inline ItemSet load_items(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<Item> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const nlohmann::json record = detail::parse_record(line, path, line_no);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!record.contains("id") || !record["id"].is_string()) {
      throw Error(ErrorKind::Parse, where + ": missing string field 'id'");
    }
    if (!record.contains("text") || !record["text"].is_string()) {
      throw Error(ErrorKind::Parse, where + ": missing string field 'text'");
    }
    Item item;
    item.id = record["id"].get<std::string>();
    item.text = record["text"].get<std::string>();
    if (record.contains("score") && !record["score"].is_null()) {
      if (!record["score"].is_number()) {
        throw Error(ErrorKind::Parse, where + ": field 'score' must be a number");
      }
      item.gold_score = record["score"].get<double>();
    }
    items.push_back(std::move(item));
  }
  return ItemSet(std::move(items));  // throws on duplicate ids
}

inline void save_items(const ItemSet& items, const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  for (const Item& item : items) {
    nlohmann::ordered_json record;
    record["id"] = item.id;
    record["text"] = item.text;
    if (item.gold_score) record["score"] = *item.gold_score;
    out << record.dump() << '\n';
  }
}

/// Comparisons file: one JSON record per line with string fields `i`, `j`
/// and exactly one of `p` (number in [0,1]) or `winner` ("i" | "j").
inline ComparisonSet load_comparisons(const std::filesystem::path& path,
                                      std::shared_ptr<const ItemSet> universe) {
  std::ifstream in = detail::open_input(path);
  std::vector<Comparison> comparisons;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const nlohmann::json record = detail::parse_record(line, path, line_no);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!record.contains("i") || !record["i"].is_string() || !record.contains("j") ||
        !record["j"].is_string()) {
      throw Error(ErrorKind::Parse, where + ": records need string fields 'i' and 'j'");
    }
    const std::string id_i = record["i"].get<std::string>();
    const std::string id_j = record["j"].get<std::string>();
    const auto idx_i = universe->index_of(id_i);
    const auto idx_j = universe->index_of(id_j);
    if (!idx_i) throw Error(ErrorKind::Validation, where + ": unknown item id '" + id_i + "'");
    if (!idx_j) throw Error(ErrorKind::Validation, where + ": unknown item id '" + id_j + "'");

    const bool has_p = record.contains("p") && !record["p"].is_null();
    const bool has_winner = record.contains("winner") && !record["winner"].is_null();
    if (has_p == has_winner) {
      throw Error(ErrorKind::Parse, where + ": give exactly one of 'p' or 'winner'");
    }
    double p = 0.0;
    if (has_p) {
      if (!record["p"].is_number()) {
        throw Error(ErrorKind::Parse, where + ": field 'p' must be a number");
      }
      p = record["p"].get<double>();
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorKind::Range, where + ": probability outside [0, 1]");
      }
    } else {
      const std::string winner = record["winner"].get<std::string>();
      if (winner == "i") {
        p = 1.0;
      } else if (winner == "j") {
        p = 0.0;
      } else {
        throw Error(ErrorKind::Parse, where + ": 'winner' must be \"i\" or \"j\"");
      }
    }
    if (*idx_i == *idx_j) {
      throw Error(ErrorKind::Validation, where + ": self-pair '" + id_i + "'");
    }
    comparisons.emplace_back(*idx_i, *idx_j, p);
  }
  return ComparisonSet(std::move(universe), std::move(comparisons));
}

inline ComparisonSet load_comparisons(const std::filesystem::path& path, ItemSet universe) {
  return load_comparisons(path, std::make_shared<const ItemSet>(std::move(universe)));
}

inline void save_comparisons(const ComparisonSet& set, const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  const ItemSet& universe = set.universe();
  for (const Comparison& c : set.comparisons()) {
    nlohmann::ordered_json record;
    record["i"] = universe[c.first()].id;
    record["j"] = universe[c.second()].id;
    record["p"] = c.prob();
    out << record.dump() << '\n';
  }
}

}  // namespace comprank

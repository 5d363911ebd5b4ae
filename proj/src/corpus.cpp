#include "geosent/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <set>
#include <sstream>
#include <unordered_set>

#include "geosent/csv.hpp"
#include "geosent/error.hpp"
#include "geosent/unicode.hpp"

namespace geosent::corpus {
namespace {

using nlohmann::json;

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals_ascii(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [](char x, char y) { return ascii_lower(x) == ascii_lower(y); });
}

std::optional<std::string> optional_text(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

// Shared acceptance rules for one decoded record; returns a reason on rejection.
std::optional<std::string> admit(RawPost& post, const std::optional<std::string>& timestamp,
                                 std::unordered_set<std::string>& seen) {
  if (post.id.empty()) return "missing id";
  if (unicode::trim(post.text).empty()) return "empty text";
  if (timestamp && !timestamp->empty()) {
    post.timestamp = parse_rfc3339(*timestamp);
    if (!post.timestamp) return "bad timestamp '" + *timestamp + "'";
  }
  if (!seen.insert(post.id).second) return "duplicate id '" + post.id + "'";
  return std::nullopt;
}

std::optional<std::string> json_string_field(const json& obj, const char* key, bool& ok) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    ok = false;
    return std::nullopt;
  }
  return it->get<std::string>();
}

LoadReport read_jsonl(std::istream& in) {
  LoadReport report;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (unicode::trim(line).empty()) continue;
    auto skip = [&](const std::string& why) {
      ++report.skipped;
      report.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      skip("malformed JSON");
      continue;
    }
    bool ok = true;
    RawPost post;
    post.id = json_string_field(obj, "id", ok).value_or("");
    post.text = json_string_field(obj, "text", ok).value_or("");
    auto ts = json_string_field(obj, "timestamp", ok);
    post.place_name = json_string_field(obj, "place", ok);
    post.language = json_string_field(obj, "lang", ok);
    if (!ok) {
      skip("non-string field");
      continue;
    }
    if (auto why = admit(post, ts, seen)) {
      skip(*why);
      continue;
    }
    report.posts.push_back(std::move(post));
  }
  return report;
}

LoadReport read_csv(std::istream& in) {
  LoadReport report;
  auto table = csv::read_stream(in);
  auto id_col = table.require_column("id", "posts");
  auto text_col = table.require_column("text", "posts");
  auto ts_col = table.column("timestamp");
  auto place_col = table.column("place");
  auto lang_col = table.column("lang");
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto skip = [&](const std::string& why) {
      ++report.skipped;
      report.warnings.push_back("line " + std::to_string(table.lines[r]) + ": " + why);
    };
    if (row.size() != table.header.size()) {
      skip("expected " + std::to_string(table.header.size()) + " fields, got " +
           std::to_string(row.size()));
      continue;
    }
    RawPost post;
    post.id = row[id_col];
    post.text = row[text_col];
    std::optional<std::string> ts;
    if (ts_col) ts = optional_text(row[*ts_col]);
    if (place_col) post.place_name = optional_text(row[*place_col]);
    if (lang_col) post.language = optional_text(row[*lang_col]);
    if (auto why = admit(post, ts, seen)) {
      skip(*why);
      continue;
    }
    report.posts.push_back(std::move(post));
  }
  return report;
}

bool better(const GazetteerEntry& candidate, const GazetteerEntry& incumbent) {
  if (candidate.importance != incumbent.importance) return candidate.importance > incumbent.importance;
  return candidate.region_id < incumbent.region_id;
}

template <typename Entries>
std::optional<Resolution> pick(const Entries& matches) {
  const GazetteerEntry* best = nullptr;
  for (const GazetteerEntry* e : matches) {
    if (!best || better(*e, *best)) best = e;
  }
  if (!best) return std::nullopt;
  Resolution res{best->region_id, best->importance, false};
  for (const GazetteerEntry* e : matches) {
    if (e != best && e->importance == best->importance && e->region_id != best->region_id) {
      res.tied = true;
    }
  }
  return res;
}

}  // namespace

PostFormat format_from_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot != std::string_view::npos && iequals_ascii(path.substr(dot), ".csv")) return PostFormat::Csv;
  return PostFormat::Jsonl;
}

LoadReport read_posts(std::istream& in, PostFormat format) {
  return format == PostFormat::Csv ? read_csv(in) : read_jsonl(in);
}

LoadReport load_posts(const std::string& path, PostFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open posts file " + path);
  return read_posts(in, format);
}

void write_posts(std::ostream& out, std::span<const RawPost> posts, PostFormat format) {
  if (format == PostFormat::Csv) {
    csv::write_row(out, {"id", "text", "timestamp", "place", "lang"});
    for (const auto& p : posts) {
      csv::write_row(out, {p.id, p.text, p.timestamp ? format_rfc3339(*p.timestamp) : "",
                           p.place_name.value_or(""), p.language.value_or("")});
    }
    return;
  }
  for (const auto& p : posts) {
    nlohmann::ordered_json obj;
    obj["id"] = p.id;
    obj["text"] = p.text;
    obj["timestamp"] = p.timestamp ? nlohmann::ordered_json(format_rfc3339(*p.timestamp)) : nullptr;
    obj["place"] = p.place_name ? nlohmann::ordered_json(*p.place_name) : nullptr;
    obj["lang"] = p.language ? nlohmann::ordered_json(*p.language) : nullptr;
    out << obj.dump() << '\n';
  }
}

std::vector<RawPost> filter_located(std::span<const RawPost> posts, std::string_view language) {
  std::vector<RawPost> kept;
  for (const auto& p : posts) {
    if (!p.place_name || unicode::trim(*p.place_name).empty()) continue;
    if (!p.language || !iequals_ascii(*p.language, language)) continue;
    kept.push_back(p);
  }
  return kept;
}

std::string place_key(std::string_view place_name) { return unicode::fold(unicode::trim(place_name)); }

std::optional<Resolution> resolve_region(std::string_view place_name,
                                         std::span<const GazetteerEntry> gazetteer) {
  const std::string key = place_key(place_name);
  std::vector<const GazetteerEntry*> matches;
  for (const auto& e : gazetteer) {
    if (place_key(e.place_name) == key) matches.push_back(&e);
  }
  return pick(matches);
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!std::isfinite(e.importance)) {
      throw DataError("gazetteer: non-finite importance for '" + e.place_name + "'");
    }
    auto key = place_key(e.place_name);
    if (!pairs.emplace(key, e.region_id).second) {
      throw DataError("gazetteer: duplicate entry ('" + e.place_name + "', '" + e.region_id + "')");
    }
    index_[key].push_back(i);
  }
}

Gazetteer Gazetteer::load(const std::string& path) {
  auto table = csv::read_file(path);
  const char* src = "gazetteer";
  auto c_place = table.require_column("place_name", src);
  auto c_commune = table.require_column("commune", src);
  auto c_region = table.require_column("region_id", src);
  auto c_province = table.require_column("province", src);
  auto c_importance = table.require_column("importance", src);
  auto c_population = table.require_column("population", src);
  std::vector<GazetteerEntry> entries;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto where = path + ":" + std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw DataError(where + ": wrong field count");
    GazetteerEntry e;
    e.place_name = row[c_place];
    e.commune = row[c_commune];
    e.region_id = row[c_region];
    e.province = row[c_province];
    auto imp = csv::to_double(row[c_importance]);
    if (!imp || !std::isfinite(*imp) || *imp < 0.0 || *imp > 1.0) {
      throw DataError(where + ": importance must be a number in [0,1]");
    }
    e.importance = *imp;
    auto pop = row[c_population].empty() ? std::optional<std::int64_t>{0}
                                         : csv::to_int64(row[c_population]);
    if (!pop || *pop < 0) throw DataError(where + ": population must be a nonnegative integer");
    e.population = *pop;
    if (e.place_name.empty() || e.region_id.empty()) {
      throw DataError(where + ": place_name and region_id are required");
    }
    entries.push_back(std::move(e));
  }
  return Gazetteer(std::move(entries));
}

std::optional<Resolution> Gazetteer::resolve(std::string_view place_name) const {
  auto it = index_.find(place_key(place_name));
  if (it == index_.end()) return std::nullopt;
  std::vector<const GazetteerEntry*> matches;
  for (auto i : it->second) matches.push_back(&entries_[i]);
  return pick(matches);
}

const RegionRecord* RegionTable::find(std::string_view region_id) const {
  for (const auto& r : rows) {
    if (r.region_id == region_id) return &r;
  }
  return nullptr;
}

std::map<std::string, std::int64_t> RegionTable::populations() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& r : rows) out[r.region_id] = r.population;
  return out;
}

RegionTable read_region_table(std::istream& in, std::string_view source,
                              const std::optional<std::vector<std::string>>& schema) {
  auto table = csv::read_stream(in);
  auto c_region = table.require_column("region_id", source);
  auto c_pop = table.require_column("population", source);
  auto c_outcome = table.require_column("outcome", source);
  RegionTable out;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == c_region || c == c_pop || c == c_outcome) continue;
    const auto& name = table.header[c];
    if (schema && std::find(schema->begin(), schema->end(), name) == schema->end()) {
      throw DataError(std::string(source) + ": feature column '" + name + "' is not in the schema");
    }
    if (std::find(out.feature_names.begin(), out.feature_names.end(), name) != out.feature_names.end()) {
      throw DataError(std::string(source) + ": duplicate column '" + name + "'");
    }
    out.feature_names.push_back(name);
    feature_cols.push_back(c);
  }
  std::set<std::string> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto where = std::string(source) + ":" + std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw DataError(where + ": wrong field count");
    RegionRecord rec;
    rec.region_id = row[c_region];
    if (rec.region_id.empty()) throw DataError(where + ": empty region_id");
    if (!ids.insert(rec.region_id).second) {
      throw DataError(where + ": duplicate region_id '" + rec.region_id + "'");
    }
    auto pop = csv::to_int64(row[c_pop]);
    if (!pop || *pop <= 0) throw DataError(where + ": population must be a positive integer");
    rec.population = *pop;
    auto outcome = csv::to_double(row[c_outcome]);
    if (!outcome || !(*outcome >= 0.0 && *outcome <= 1.0)) {
      throw DataError(where + ": outcome must be in [0,1]");
    }
    rec.outcome = *outcome;
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      auto v = csv::to_double(row[feature_cols[f]]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(where + ": feature '" + out.feature_names[f] + "' is not a finite number");
      }
      rec.features[out.feature_names[f]] = *v;
    }
    out.rows.push_back(std::move(rec));
  }
  return out;
}

RegionTable load_region_table(const std::string& path,
                              const std::optional<std::vector<std::string>>& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open region table " + path);
  return read_region_table(in, path, schema);
}

RegionCountReport region_counts(std::span<const std::optional<std::string>> resolved_regions,
                                const std::map<std::string, std::int64_t>& populations) {
  RegionCountReport report;
  for (const auto& region : resolved_regions) {
    if (!region) {
      ++report.unresolved;
      continue;
    }
    ++report.regions[*region].count;
    ++report.resolved;
  }
  for (auto& [id, rc] : report.regions) {
    auto it = populations.find(id);
    if (it != populations.end() && it->second > 0) {
      rc.weighted = static_cast<double>(rc.count) / static_cast<double>(it->second);
    }
  }
  return report;
}

}  // namespace geosent::corpus

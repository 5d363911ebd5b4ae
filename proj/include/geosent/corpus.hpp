#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geosent/timeutil.hpp"

namespace geosent::corpus {

struct RawPost {
  std::string id;
  std::string text;
  std::optional<Timestamp> timestamp;
  std::optional<std::string> place_name;
  std::optional<std::string> language;

  bool operator==(const RawPost&) const = default;
};

enum class PostFormat { Jsonl, Csv };

// Picks the format from the file extension (".csv" -> Csv, anything else Jsonl).
PostFormat format_from_path(std::string_view path);

struct LoadReport {
  std::vector<RawPost> posts;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;  // one per skipped record
};

// Records with a missing id, empty text, unparseable timestamp, or an id seen
// earlier are dropped and counted. An unreadable file throws DataError.
LoadReport load_posts(const std::string& path, PostFormat format);
LoadReport read_posts(std::istream& in, PostFormat format);

void write_posts(std::ostream& out, std::span<const RawPost> posts, PostFormat format);

// Keeps posts with a non-blank place name whose language tag equals `language`
// (ASCII case-insensitive, as IETF tags are).
std::vector<RawPost> filter_located(std::span<const RawPost> posts, std::string_view language);

// Place name lookup key: trimmed, NFC-normalized and case-folded.
std::string place_key(std::string_view place_name);

struct GazetteerEntry {
  std::string place_name;
  std::string commune;
  std::string region_id;  // poviat
  std::string province;   // voivodeship
  double importance = 0.0;
  std::int64_t population = 0;
};

struct Resolution {
  std::string region_id;
  double importance = 0.0;
  bool tied = false;  // several entries shared the maximum importance
};

// Reference resolver: linear scan over all entries. Highest importance wins;
// equal importance goes to the lexicographically smallest region_id.
std::optional<Resolution> resolve_region(std::string_view place_name,
                                         std::span<const GazetteerEntry> gazetteer);

class Gazetteer {
 public:
  Gazetteer() = default;
  // Throws DataError on non-finite importance or a duplicated (place, region) pair.
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  static Gazetteer load(const std::string& path);

  // Same answer as resolve_region() over entries(), via a name index.
  std::optional<Resolution> resolve(std::string_view place_name) const;

  const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<GazetteerEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

struct RegionRecord {
  std::string region_id;
  std::int64_t population = 0;
  double outcome = 0.0;
  std::map<std::string, double> features;
};

struct RegionTable {
  std::vector<std::string> feature_names;  // column order of the source file
  std::vector<RegionRecord> rows;

  const RegionRecord* find(std::string_view region_id) const;
  std::map<std::string, std::int64_t> populations() const;
};

// CSV `region_id,population,outcome,<features...>`. When `schema` is given,
// every feature column must be named in it.
RegionTable load_region_table(const std::string& path,
                              const std::optional<std::vector<std::string>>& schema = std::nullopt);
RegionTable read_region_table(std::istream& in, std::string_view source,
                              const std::optional<std::vector<std::string>>& schema = std::nullopt);

struct RegionCount {
  std::size_t count = 0;
  std::optional<double> weighted;  // count / population; absent without a population
};

struct RegionCountReport {
  std::map<std::string, RegionCount> regions;
  std::size_t resolved = 0;
  std::size_t unresolved = 0;
};

RegionCountReport region_counts(std::span<const std::optional<std::string>> resolved_regions,
                                const std::map<std::string, std::int64_t>& populations);

}  // namespace geosent::corpus

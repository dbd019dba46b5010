#include "cem/prep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "cem/csv.hpp"
#include "cem/error.hpp"
#include "cem/stats.hpp"

namespace cem {

TractDistribution TractDistribution::build(const std::vector<TripRecord>& trips) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& t : trips) {
    if (t.pickup_is_tract() && !t.pickup_community.empty())
      ++counts[t.pickup_community][t.pickup_tract];
    if (t.dropoff_is_tract() && !t.dropoff_community.empty())
      ++counts[t.dropoff_community][t.dropoff_tract];
  }

  std::set<std::string> needed;
  for (const auto& t : trips) {
    if (!t.pickup_is_tract()) needed.insert(t.pickup_community);
    if (!t.dropoff_is_tract()) needed.insert(t.dropoff_community);
  }
  std::vector<std::string> unresolved;
  for (const auto& c : needed)
    if (counts.find(c) == counts.end()) unresolved.push_back(c);
  if (!unresolved.empty()) {
    std::string msg = "no tract-level trips observed for communities:";
    for (const auto& c : unresolved) msg += " " + c;
    throw DataError(msg);
  }

  TractDistribution dist;
  for (const auto& [community, tract_counts] : counts) {
    double total = 0.0;
    for (const auto& [tract, n] : tract_counts) total += static_cast<double>(n);
    std::vector<Entry> entries;
    entries.reserve(tract_counts.size());
    for (const auto& [tract, n] : tract_counts)
      entries.push_back({tract, static_cast<double>(n) / total});
    dist.table_.emplace(community, std::move(entries));
  }
  return dist;
}

bool TractDistribution::resolves(const std::string& community) const {
  return table_.find(community) != table_.end();
}

const std::vector<TractDistribution::Entry>& TractDistribution::entries(
    const std::string& community) const {
  auto it = table_.find(community);
  if (it == table_.end()) throw DataError("unknown community \"" + community + "\"");
  return it->second;
}

const std::string& TractDistribution::sample(const std::string& community,
                                             Rng& rng) const {
  const auto& es = entries(community);
  const double u = rng.uniform();
  double cum = 0.0;
  for (const auto& e : es) {
    cum += e.probability;
    if (u < cum) return e.tract;
  }
  return es.back().tract;
}

std::vector<TripRecord> stratified_assign(std::vector<TripRecord> trips,
                                          const TractDistribution& dist,
                                          std::uint64_t seed) {
  Rng rng(hash_seed(seed, 0x5452414354ULL));  // independent stream per call
  for (auto& t : trips) {
    if (!t.pickup_is_tract()) t.pickup_tract = dist.sample(t.pickup_community, rng);
    if (!t.dropoff_is_tract()) t.dropoff_tract = dist.sample(t.dropoff_community, rng);
  }
  return trips;
}

std::vector<TripRecord> filter_trips(const std::vector<TripRecord>& trips,
                                     const std::set<std::string>* holidays,
                                     FilterCounts* counts) {
  FilterCounts local;
  std::vector<TripRecord> kept;
  kept.reserve(trips.size());
  for (const auto& t : trips) {
    if (t.fare == 0.0) {
      ++local.zero_fare;
    } else if (t.duration_s < 60.0) {
      ++local.short_duration;
    } else if (t.distance_mi < 0.25) {
      ++local.short_distance;
    } else if (holidays && !t.date.empty() && holidays->count(t.date)) {
      ++local.holiday;
    } else {
      kept.push_back(t);
    }
  }
  if (counts) *counts = local;
  return kept;
}

OdGroups group_by_od(const std::vector<TripRecord>& trips) {
  OdGroups groups;
  for (const auto& t : trips) {
    if (!t.pickup_is_tract() || !t.dropoff_is_tract())
      throw DataError("trip without tract ids reached OD grouping; run stratified "
                      "assignment first");
    groups[{t.pickup_tract, t.dropoff_tract}].push_back(t);
  }
  return groups;
}

namespace {

// Flags values outside [Q1 - 3 IQR, Q3 + 3 IQR].
std::vector<bool> iqr_flags(const std::vector<double>& values) {
  const double q1 = quantile(values, 0.25);
  const double q3 = quantile(values, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - 3.0 * iqr;
  const double hi = q3 + 3.0 * iqr;
  std::vector<bool> flags(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    flags[i] = values[i] < lo || values[i] > hi;
  return flags;
}

}  // namespace

std::size_t remove_od_outliers(OdGroups& groups) {
  std::size_t removed = 0;
  for (auto& [key, trips] : groups) {
    // Passes repeat until stable: pruning extremes shrinks the IQR, which can
    // expose further outliers, and the fixed point makes the rule idempotent.
    while (trips.size() > 2) {
      std::vector<double> dist(trips.size()), dur(trips.size());
      for (std::size_t i = 0; i < trips.size(); ++i) {
        dist[i] = trips[i].distance_mi;
        dur[i] = trips[i].duration_s;
      }
      const auto dist_flags = iqr_flags(dist);
      const auto dur_flags = iqr_flags(dur);
      std::vector<TripRecord> kept;
      kept.reserve(trips.size());
      for (std::size_t i = 0; i < trips.size(); ++i) {
        if (dist_flags[i] || dur_flags[i])
          ++removed;
        else
          kept.push_back(trips[i]);
      }
      if (kept.size() == trips.size()) break;
      trips = std::move(kept);
    }
  }
  return removed;
}

CentroidMap load_centroids(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3)
    throw SchemaError("centroid file needs (tract, x, y) columns: " + path.string());
  CentroidMap map;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    TractCentroid c;
    auto parse = [&](const std::string& cell, double& out) {
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
      if (res.ec != std::errc{})
        throw ParseError("centroid row " + std::to_string(r) + ": bad number \"" + cell +
                         "\"");
    };
    parse(row[1], c.x);
    parse(row[2], c.y);
    map[row[0]] = c;
  }
  return map;
}

FeatureSchema impedance_schema() {
  return FeatureSchema::from_columns({
      {"origin", ColumnRole::key},
      {"destination", ColumnRole::key},
      {"Total_number_trips", ColumnRole::dependent},
      {"Fare_median", ColumnRole::travel_impedance},
      {"Fare_sd", ColumnRole::travel_impedance},
      {"Miles_median", ColumnRole::travel_impedance},
      {"Miles_sd", ColumnRole::travel_impedance},
      {"Seconds_median", ColumnRole::travel_impedance},
      {"Seconds_sd", ColumnRole::travel_impedance},
      {"Euclidean_Distance", ColumnRole::travel_impedance},
  });
}

ODPairDataset aggregate_od(const OdGroups& groups, const CentroidMap& centroids,
                           std::size_t min_trips) {
  const FeatureSchema schema = impedance_schema();
  std::vector<ODRow> rows;
  for (const auto& [key, trips] : groups) {
    if (trips.size() < min_trips) continue;
    auto o_it = centroids.find(key.first);
    auto d_it = centroids.find(key.second);
    if (o_it == centroids.end())
      throw DataError("unknown tract \"" + key.first + "\" in centroid file");
    if (d_it == centroids.end())
      throw DataError("unknown tract \"" + key.second + "\" in centroid file");

    std::vector<double> fare(trips.size()), dist(trips.size()), dur(trips.size());
    for (std::size_t i = 0; i < trips.size(); ++i) {
      fare[i] = trips[i].fare;
      dist[i] = trips[i].distance_mi;
      dur[i] = trips[i].duration_s;
    }
    const double dx = o_it->second.x - d_it->second.x;
    const double dy = o_it->second.y - d_it->second.y;

    ODRow row;
    row.origin = key.first;
    row.destination = key.second;
    row.target = static_cast<double>(trips.size());
    row.values = {median(fare), sample_sd(fare), median(dist), sample_sd(dist),
                  median(dur),  sample_sd(dur),  std::sqrt(dx * dx + dy * dy)};
    rows.push_back(std::move(row));
  }
  return ODPairDataset(schema, std::move(rows));
}

std::vector<TripRecord> load_trips(const std::filesystem::path& path,
                                   const TripColumnMap& map) {
  const CsvTable table = read_csv(path);
  const std::size_t pt = table.column(map.pickup_tract);
  const std::size_t dt = table.column(map.dropoff_tract);
  const std::size_t pc = table.column(map.pickup_community);
  const std::size_t dc = table.column(map.dropoff_community);
  const std::size_t fare = table.column(map.fare);
  const std::size_t miles = table.column(map.distance);
  const std::size_t secs = table.column(map.duration);
  const bool has_ts = table.has_column(map.timestamp);
  const std::size_t ts = has_ts ? table.column(map.timestamp) : 0;

  auto parse = [](const std::string& cell, std::size_t row, const char* what) {
    if (cell.empty()) return 0.0;
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{})
      throw ParseError("trip row " + std::to_string(row) + ": bad " + what + " \"" +
                       cell + "\"");
    return v;
  };

  std::vector<TripRecord> trips;
  trips.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    TripRecord t;
    t.pickup_tract = cells[pt];
    t.dropoff_tract = cells[dt];
    t.pickup_community = cells[pc];
    t.dropoff_community = cells[dc];
    t.fare = parse(cells[fare], r, "fare");
    t.distance_mi = parse(cells[miles], r, "distance");
    t.duration_s = parse(cells[secs], r, "duration");
    if (has_ts) {
      const std::string& stamp = cells[ts];
      t.date = stamp.substr(0, stamp.find(' '));
    }
    if (t.fare < 0 || t.distance_mi < 0 || t.duration_s < 0)
      throw DataError("trip row " + std::to_string(r) +
                      ": negative fare/distance/duration");
    trips.push_back(std::move(t));
  }
  return trips;
}

std::set<std::string> load_holiday_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open holiday list: " + path.string());
  std::set<std::string> days;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') days.insert(line);
  }
  return days;
}

ODPairDataset join_tract_features(const ODPairDataset& od,
                                  const std::filesystem::path& features_csv,
                                  const std::map<std::string, ColumnRole>& roles) {
  const CsvTable table = read_csv(features_csv);
  if (table.header.empty()) throw SchemaError("feature file has no columns");
  const std::string& tract_col = table.header[0];

  std::vector<std::string> feat_names;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (roles.find(name) == roles.end())
      throw ConfigError("no role configured for tract feature \"" + name + "\"");
    feat_names.push_back(name);
  }

  std::map<std::string, std::vector<double>> by_tract;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    std::vector<double> vals;
    vals.reserve(feat_names.size());
    for (std::size_t c = 1; c < table.header.size(); ++c) {
      double v = 0.0;
      auto res = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (res.ec != std::errc{})
        throw ParseError("feature row " + std::to_string(r) + " (" + tract_col + "=" +
                         cells[0] + "): bad number \"" + cells[c] + "\"");
      vals.push_back(v);
    }
    by_tract[cells[0]] = std::move(vals);
  }

  std::vector<Column> cols = od.schema().columns();
  for (const auto& name : feat_names) cols.push_back({name + "_Ori", roles.at(name)});
  for (const auto& name : feat_names) cols.push_back({name + "_Des", roles.at(name)});
  const FeatureSchema schema = FeatureSchema::from_columns(std::move(cols));

  std::vector<ODRow> rows;
  rows.reserve(od.size());
  for (const auto& r : od.rows()) {
    auto o_it = by_tract.find(r.origin);
    auto d_it = by_tract.find(r.destination);
    if (o_it == by_tract.end())
      throw DataError("tract \"" + r.origin + "\" missing from feature file");
    if (d_it == by_tract.end())
      throw DataError("tract \"" + r.destination + "\" missing from feature file");
    ODRow out = r;
    out.values.insert(out.values.end(), o_it->second.begin(), o_it->second.end());
    out.values.insert(out.values.end(), d_it->second.begin(), d_it->second.end());
    rows.push_back(std::move(out));
  }
  return ODPairDataset(schema, std::move(rows));
}

}  // namespace cem

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cem/dataset.hpp"
#include "cem/rng.hpp"

namespace cem {

// One trip from the raw export. Endpoints carry the community id and, when
// the record is tract-level, the tract id as well; an empty tract id marks a
// community-level record that needs stratified assignment.
struct TripRecord {
  std::string pickup_tract;
  std::string pickup_community;
  std::string dropoff_tract;
  std::string dropoff_community;
  double fare = 0.0;
  double duration_s = 0.0;
  double distance_mi = 0.0;
  std::string date;  // optional; empty when the export has no date column

  bool pickup_is_tract() const { return !pickup_tract.empty(); }
  bool dropoff_is_tract() const { return !dropoff_tract.empty(); }
};

// Observed tract shares per community, pooled over pickup and dropoff
// endpoints of tract-level records.
class TractDistribution {
 public:
  struct Entry {
    std::string tract;
    double probability;
  };

  static TractDistribution build(const std::vector<TripRecord>& trips);

  bool resolves(const std::string& community) const;
  const std::vector<Entry>& entries(const std::string& community) const;

  // Inverse-CDF draw; entry order is fixed, so results depend only on rng.
  const std::string& sample(const std::string& community, Rng& rng) const;

 private:
  std::map<std::string, std::vector<Entry>> table_;
};

// Replaces community-level endpoints with sampled tract ids. Trips are
// processed in input order with one RNG stream, so runs are reproducible.
std::vector<TripRecord> stratified_assign(std::vector<TripRecord> trips,
                                          const TractDistribution& dist,
                                          std::uint64_t seed);

struct FilterCounts {
  std::size_t zero_fare = 0;
  std::size_t short_duration = 0;
  std::size_t short_distance = 0;
  std::size_t holiday = 0;
};

// Drops trips with zero fare, duration under 60 s, or distance under
// 0.25 mi; when a holiday set is given, trips whose date is in it also go.
std::vector<TripRecord> filter_trips(const std::vector<TripRecord>& trips,
                                     const std::set<std::string>* holidays = nullptr,
                                     FilterCounts* counts = nullptr);

using OdKey = std::pair<std::string, std::string>;
using OdGroups = std::map<OdKey, std::vector<TripRecord>>;

OdGroups group_by_od(const std::vector<TripRecord>& trips);

// Two-sided 3-IQR rule on distance and duration, applied independently per
// metric within each OD group; a trip goes if either metric flags it.
// Quartiles use linear interpolation (type 7). Groups of size <= 2 are left
// alone. Returns the number of trips removed.
std::size_t remove_od_outliers(OdGroups& groups);

struct TractCentroid {
  double x = 0.0;
  double y = 0.0;
};
using CentroidMap = std::map<std::string, TractCentroid>;

CentroidMap load_centroids(const std::filesystem::path& path);

// Builds the travel-impedance portion of the OD dataset: trip count (target),
// median/sd of fare, distance, duration, plus centroid Euclidean distance.
// Groups with fewer than min_trips trips are dropped.
ODPairDataset aggregate_od(const OdGroups& groups, const CentroidMap& centroids,
                           std::size_t min_trips = 50);

// Column names emitted by aggregate_od, in order.
FeatureSchema impedance_schema();

// Reads a trip CSV with a configurable column mapping (Chicago open-data
// export names by default).
struct TripColumnMap {
  std::string pickup_tract = "Pickup Census Tract";
  std::string dropoff_tract = "Dropoff Census Tract";
  std::string pickup_community = "Pickup Community Area";
  std::string dropoff_community = "Dropoff Community Area";
  std::string fare = "Fare";
  std::string distance = "Trip Miles";
  std::string duration = "Trip Seconds";
  std::string timestamp = "Trip Start Timestamp";  // optional column
};

std::vector<TripRecord> load_trips(const std::filesystem::path& path,
                                   const TripColumnMap& map = {});

std::set<std::string> load_holiday_list(const std::filesystem::path& path);

// Joins per-tract features onto each OD row as <name>_Ori / <name>_Des
// columns. roles maps feature-file column name -> role for both suffixes.
ODPairDataset join_tract_features(const ODPairDataset& od,
                                  const std::filesystem::path& features_csv,
                                  const std::map<std::string, ColumnRole>& roles);

}  // namespace cem

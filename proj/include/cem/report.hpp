#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cem/dataset.hpp"
#include "cem/ensemble.hpp"

namespace cem {

// Cluster-share table: per label the OD-pair count, share (%) and average
// demand, plus a closing row for the whole dataset.
void write_cluster_shares(const std::filesystem::path& path,
                          const std::vector<std::string>& labels,
                          const std::vector<std::size_t>& counts,
                          const std::vector<double>& mean_demand, std::size_t total,
                          double total_mean_demand);

// Per-cluster mean/sd of every feature column and the target, on the
// pre-normalized data; rows = variables, column pairs = clusters.
void write_descriptive_stats(const std::filesystem::path& path,
                             const ODPairDataset& data,
                             const std::vector<std::size_t>& labels,
                             const std::vector<std::string>& label_names);

// Rows = learner families, columns = clusters plus "All Clusters": tuned
// mean CV MSE per cell.
void write_cv_table(const std::filesystem::path& path,
                    const std::vector<Family>& families, const CemProvenance& prov,
                    const ComparisonReport& report);

void write_benchmark_comparison(const std::filesystem::path& path,
                                const ComparisonReport& report);

void write_cem_vs_benchmark(const std::filesystem::path& path,
                            const ComparisonReport& report);

// Equal-width histogram bins pooled over all rows, counted per cluster; one
// block of rows per metric column, edges included.
void write_histogram_bins(const std::filesystem::path& path, const ODPairDataset& data,
                          const std::vector<std::size_t>& labels,
                          const std::vector<std::string>& label_names,
                          const std::vector<std::string>& columns, std::size_t bins);

void write_assignments(const std::filesystem::path& path, const ODPairDataset& data,
                       const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& label_names);

void write_predictions(const std::filesystem::path& path,
                       const ComparisonReport& report);

// Human-readable summary mirroring the two performance tables.
void write_text_report(const std::filesystem::path& path, const ComparisonReport& report,
                       const CemProvenance& prov);

}  // namespace cem

#include "cem/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cem/csv.hpp"
#include "cem/error.hpp"
#include "cem/stats.hpp"

namespace cem {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report file: " + path.string());
  return out;
}

std::string fixed2(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::string fixed_n(double v, int digits) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

void write_cluster_shares(const std::filesystem::path& path,
                          const std::vector<std::string>& labels,
                          const std::vector<std::size_t>& counts,
                          const std::vector<double>& mean_demand, std::size_t total,
                          double total_mean_demand) {
  auto out = open_out(path);
  out << "No.,Cluster,Number of OD Pairs,Share (%),Average Ridesourcing Demand\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double share =
        total ? 100.0 * static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
    out << (i + 1) << ',' << csv_escape(labels[i]) << ',' << counts[i] << ','
        << fixed2(share) << ',' << fixed2(mean_demand[i]) << '\n';
  }
  out << "-,Original Dataset," << total << ",100.00," << fixed2(total_mean_demand)
      << '\n';
}

void write_descriptive_stats(const std::filesystem::path& path,
                             const ODPairDataset& data,
                             const std::vector<std::size_t>& labels,
                             const std::vector<std::string>& label_names) {
  auto out = open_out(path);
  out << "Variable";
  for (const auto& name : label_names)
    out << ',' << csv_escape(name + " Mean") << ',' << csv_escape(name + " SD");
  out << '\n';

  std::vector<std::vector<double>> per_cluster_targets(label_names.size());
  std::vector<std::vector<std::vector<double>>> per_cluster_values(
      label_names.size(),
      std::vector<std::vector<double>>(data.schema().feature_count()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t l = labels[i];
    per_cluster_targets[l].push_back(data.row(i).target);
    for (std::size_t f = 0; f < data.schema().feature_count(); ++f)
      per_cluster_values[l][f].push_back(data.row(i).values[f]);
  }

  out << csv_escape(data.schema().dependent_column());
  for (std::size_t l = 0; l < label_names.size(); ++l) {
    const auto& t = per_cluster_targets[l];
    out << ',' << (t.empty() ? "" : fixed2(mean(t))) << ','
        << (t.empty() ? "" : fixed2(sample_sd(t)));
  }
  out << '\n';
  for (std::size_t f = 0; f < data.schema().feature_count(); ++f) {
    out << csv_escape(data.schema().feature_names()[f]);
    for (std::size_t l = 0; l < label_names.size(); ++l) {
      const auto& v = per_cluster_values[l][f];
      out << ',' << (v.empty() ? "" : fixed2(mean(v))) << ','
          << (v.empty() ? "" : fixed2(sample_sd(v)));
    }
    out << '\n';
  }
}

void write_cv_table(const std::filesystem::path& path,
                    const std::vector<Family>& families, const CemProvenance& prov,
                    const ComparisonReport& report) {
  auto out = open_out(path);
  out << "Models";
  for (const auto& c : prov.clusters) out << ',' << csv_escape(c.label);
  out << ",All Clusters\n";
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    out << family_to_string(families[fi]);
    for (const auto& c : prov.clusters) {
      if (c.fallback || fi >= c.cv_table.size())
        out << ',';
      else
        out << ',' << fixed_n(c.cv_table[fi].mean_mse, 1);
    }
    if (fi < report.benchmarks.size())
      out << ',' << fixed_n(report.benchmarks[fi].cv_mse, 1);
    else
      out << ',';
    out << '\n';
  }
}

void write_benchmark_comparison(const std::filesystem::path& path,
                                const ComparisonReport& report) {
  auto out = open_out(path);
  out << "Model,MAE,RMSE\n";
  for (const auto& b : report.benchmarks)
    out << family_to_string(b.family) << ',' << fixed2(b.test_mae) << ','
        << fixed2(b.test_rmse) << '\n';
  out << "CEM," << fixed2(report.cem_mae) << ',' << fixed2(report.cem_rmse) << '\n';
}

void write_cem_vs_benchmark(const std::filesystem::path& path,
                            const ComparisonReport& report) {
  auto out = open_out(path);
  out << "Testing Set,CEM MAE,CEM RMSE,Benchmark MAE,Benchmark RMSE,"
         "MAE Improvement (%),RMSE Improvement (%)\n";
  for (const auto& c : report.clusters) {
    out << csv_escape(c.label) << ',' << fixed2(c.cem_mae) << ',' << fixed2(c.cem_rmse)
        << ',' << fixed2(c.bench_mae) << ',' << fixed2(c.bench_rmse) << ','
        << fixed2(c.mae_improvement) << ',' << fixed2(c.rmse_improvement) << '\n';
  }
  out << "Overall," << fixed2(report.cem_mae) << ',' << fixed2(report.cem_rmse) << ','
      << fixed2(report.benchmarks[report.best_benchmark].test_mae) << ','
      << fixed2(report.benchmarks[report.best_benchmark].test_rmse) << ','
      << fixed2(report.overall_mae_improvement) << ','
      << fixed2(report.overall_rmse_improvement) << '\n';
}

void write_histogram_bins(const std::filesystem::path& path, const ODPairDataset& data,
                          const std::vector<std::size_t>& labels,
                          const std::vector<std::string>& label_names,
                          const std::vector<std::string>& columns, std::size_t bins) {
  auto out = open_out(path);
  out << "metric,bin,lo,hi";
  for (const auto& name : label_names) out << ',' << csv_escape(name);
  out << '\n';

  for (const auto& column : columns) {
    std::size_t feature = data.schema().feature_count();
    for (std::size_t f = 0; f < data.schema().feature_count(); ++f)
      if (data.schema().feature_names()[f] == column) feature = f;
    if (feature == data.schema().feature_count()) continue;  // caller warned already

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.size(); ++i) {
      lo = std::min(lo, data.row(i).values[feature]);
      hi = std::max(hi, data.row(i).values[feature]);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double width = (hi - lo) / static_cast<double>(bins);

    std::vector<std::vector<std::size_t>> count(bins,
                                                std::vector<std::size_t>(label_names.size(), 0));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = data.row(i).values[feature];
      std::size_t b = static_cast<std::size_t>((v - lo) / width);
      if (b >= bins) b = bins - 1;
      ++count[b][labels[i]];
    }
    for (std::size_t b = 0; b < bins; ++b) {
      out << csv_escape(column) << ',' << b << ','
          << format_double(lo + width * static_cast<double>(b)) << ','
          << format_double(lo + width * static_cast<double>(b + 1));
      for (std::size_t l = 0; l < label_names.size(); ++l) out << ',' << count[b][l];
      out << '\n';
    }
  }
}

void write_assignments(const std::filesystem::path& path, const ODPairDataset& data,
                       const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& label_names) {
  auto out = open_out(path);
  out << "origin,destination,label\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << csv_escape(data.row(i).origin) << ',' << csv_escape(data.row(i).destination)
        << ',' << csv_escape(label_names[labels[i]]) << '\n';
}

void write_predictions(const std::filesystem::path& path,
                       const ComparisonReport& report) {
  auto out = open_out(path);
  out << "origin,destination,cluster,y_true,y_pred\n";
  for (const auto& r : report.rows)
    out << csv_escape(r.origin) << ',' << csv_escape(r.destination) << ','
        << csv_escape(report.labels[r.label]) << ',' << format_double(r.y_true) << ','
        << format_double(r.y_cem) << '\n';
}

void write_text_report(const std::filesystem::path& path, const ComparisonReport& report,
                       const CemProvenance& prov) {
  auto out = open_out(path);
  out << "Clustering: " << method_to_string(prov.method) << " k=" << prov.k
      << "  mean DBI=" << fixed_n(prov.mean_dbi, 4)
      << "  best DBI=" << fixed_n(prov.best_dbi, 4) << "\n\n";

  out << "Cluster sizes (training)\n";
  for (const auto& c : prov.clusters)
    out << "  " << std::left << std::setw(14) << c.label << std::right << std::setw(8)
        << c.train_rows << "  " << fixed2(c.share) << "%  mean demand "
        << fixed2(c.mean_target) << "  model " << family_to_string(c.selected_family)
        << '\n';
  out << '\n';

  out << "Benchmark comparison (test set)\n";
  out << "  " << std::left << std::setw(14) << "Model" << std::right << std::setw(12)
      << "MAE" << std::setw(12) << "RMSE" << '\n';
  for (const auto& b : report.benchmarks)
    out << "  " << std::left << std::setw(14) << family_to_string(b.family) << std::right
        << std::setw(12) << fixed2(b.test_mae) << std::setw(12) << fixed2(b.test_rmse)
        << (b.failed ? "  (failed)" : "") << '\n';
  out << "  " << std::left << std::setw(14) << "CEM" << std::right << std::setw(12)
      << fixed2(report.cem_mae) << std::setw(12) << fixed2(report.cem_rmse) << '\n';
  out << "  best benchmark: "
      << family_to_string(report.benchmarks[report.best_benchmark].family) << "\n\n";

  out << "CEM vs best benchmark per cluster (routed labels)\n";
  out << "  " << std::left << std::setw(14) << "Cluster" << std::right << std::setw(10)
      << "CEM MAE" << std::setw(11) << "CEM RMSE" << std::setw(11) << "Bench MAE"
      << std::setw(12) << "Bench RMSE" << std::setw(9) << "MAE %" << std::setw(9)
      << "RMSE %" << '\n';
  for (const auto& c : report.clusters) {
    out << "  " << std::left << std::setw(14) << c.label << std::right << std::setw(10)
        << fixed2(c.cem_mae) << std::setw(11) << fixed2(c.cem_rmse) << std::setw(11)
        << fixed2(c.bench_mae) << std::setw(12) << fixed2(c.bench_rmse) << std::setw(9)
        << fixed2(c.mae_improvement) << std::setw(9) << fixed2(c.rmse_improvement)
        << '\n';
  }
  out << "  Overall improvement: MAE " << fixed2(report.overall_mae_improvement)
      << "%  RMSE " << fixed2(report.overall_rmse_improvement) << "%\n";
  for (const auto& w : prov.warnings) out << "warning: " << w << '\n';
}

}  // namespace cem

#include "cem/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "cem/error.hpp"
#include "cem/rng.hpp"

namespace cem {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_rows == 0 || spec.n_features == 0 || spec.n_clusters == 0)
    throw InvalidArgumentError("synthetic spec needs rows, features and clusters");
  if (spec.separation < 0.0 || spec.noise < 0.0 ||
      spec.knowledge_fraction < 0.0 || spec.knowledge_fraction > 1.0)
    throw InvalidArgumentError("synthetic spec has out-of-range values");

  const std::size_t d = spec.n_features;
  const std::size_t kz = spec.n_clusters;
  const std::size_t regimes = kz + 2;  // planted clusters + airport + downtown

  Rng rng(hash_seed(spec.seed, 0x5D47ULL));

  // Axis-aligned centers: cluster z sits at separation * (1 + z/d) along
  // axis z mod d, so any two centers are at least `separation` apart.
  Matrix centers(kz, d, 0.0);
  for (std::size_t z = 0; z < kz; ++z) {
    const std::size_t axis = z % d;
    centers(z, axis) = spec.separation * (1.0 + static_cast<double>(z / d));
  }

  // Shared coefficient magnitudes; signs flip between adjacent regimes when
  // opposed_signs is set. The magnitudes are always drawn so that explicit
  // coefficient overrides never shift the rest of the stream.
  std::vector<double> magnitude(d);
  for (std::size_t j = 0; j < d; ++j)
    magnitude[j] = spec.coef_scale * rng.uniform(0.5, 1.0);

  Matrix coef(regimes, d);
  std::vector<double> intercepts(regimes, spec.intercept);
  for (std::size_t z = 0; z < regimes; ++z) {
    for (std::size_t j = 0; j < d; ++j) {
      const double sign = spec.opposed_signs ? ((z + j) % 2 == 0 ? 1.0 : -1.0) : 1.0;
      coef(z, j) = sign * magnitude[j];
    }
  }
  intercepts[kz] += 0.5;       // airport regime
  intercepts[kz + 1] -= 0.5;   // downtown regime

  if (!spec.coefficients.empty()) {
    if (spec.coefficients.size() != kz && spec.coefficients.size() != regimes)
      throw InvalidArgumentError("synthetic coefficients need one vector per cluster "
                                 "(plus optionally airport and downtown)");
    for (std::size_t z = 0; z < spec.coefficients.size(); ++z) {
      if (spec.coefficients[z].size() != d)
        throw InvalidArgumentError("synthetic coefficient vector " + std::to_string(z) +
                                   " must have n_features entries");
      for (std::size_t j = 0; j < d; ++j) coef(z, j) = spec.coefficients[z][j];
    }
  }
  if (!spec.intercepts.empty()) {
    if (spec.intercepts.size() != kz && spec.intercepts.size() != regimes)
      throw InvalidArgumentError("synthetic intercepts need one value per cluster");
    for (std::size_t z = 0; z < spec.intercepts.size(); ++z)
      intercepts[z] = spec.intercepts[z];
  }

  std::vector<Column> columns{{"origin", ColumnRole::key},
                              {"destination", ColumnRole::key},
                              {"Total_number_trips", ColumnRole::dependent}};
  const ColumnRole cycle[3] = {ColumnRole::socio_economic, ColumnRole::built_environment,
                               ColumnRole::transit_supply};
  for (std::size_t j = 0; j < d; ++j)
    columns.push_back({"f" + std::to_string(j + 1), cycle[j % 3]});
  FeatureSchema schema = FeatureSchema::from_columns(std::move(columns));

  SyntheticData out_data;
  std::vector<ODRow> rows;
  rows.reserve(spec.n_rows);
  out_data.regime.reserve(spec.n_rows);

  std::size_t knowledge_toggle = 0;
  for (std::size_t i = 0; i < spec.n_rows; ++i) {
    const std::size_t z = static_cast<std::size_t>(rng.below(kz));
    const bool knowledge = rng.uniform() < spec.knowledge_fraction;

    ODRow row;
    row.values.resize(d);
    for (std::size_t j = 0; j < d; ++j) row.values[j] = centers(z, j) + rng.normal();

    std::size_t regime = z;
    if (knowledge) {
      const bool airport = (knowledge_toggle++ % 2) == 0;
      regime = airport ? kz : kz + 1;
      if (airport) {
        row.origin = out_data.airport_tracts[knowledge_toggle % 2];
        row.destination = "T" + std::to_string(i);
      } else {
        row.origin = "T" + std::to_string(i);
        row.destination = out_data.downtown_tracts[knowledge_toggle % 3];
      }
    } else {
      row.origin = "O" + std::to_string(i);
      row.destination = "D" + std::to_string(i);
    }

    double eta = intercepts[regime];
    for (std::size_t j = 0; j < d; ++j)
      eta += coef(regime, j) * (row.values[j] - centers(z, j));
    eta = std::clamp(eta, -20.0, 9.2);  // rate capped near 1e4
    const double mu = std::exp(eta);

    double y;
    if (spec.noise <= 0.0) {
      y = mu;
    } else {
      const double v = spec.noise * spec.noise;
      y = v * static_cast<double>(rng.poisson(mu / v));
    }
    row.target = y;
    rows.push_back(std::move(row));
    out_data.regime.push_back(static_cast<int>(regime));
  }

  out_data.data = ODPairDataset(std::move(schema), std::move(rows));
  out_data.coefficients = std::move(coef);
  out_data.intercepts = std::move(intercepts);
  return out_data;
}

}  // namespace cem

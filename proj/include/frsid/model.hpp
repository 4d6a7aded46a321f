#pragma once

// Innovation-form state-space model and its JSON container ("frsid-model-1"):
//
//   x(t+1) = A x(t) + B u(t) + K e(t)
//   y(t)   = C x(t) + D u(t) + e(t),    cov(e) = eta.
//
// Matrices are stored in the JSON file as arrays of rows (row-major).

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frsid/errors.hpp"
#include "frsid/types.hpp"

namespace frsid {

struct StateSpaceModel {
  Matrix a;    ///< n x n
  Matrix b;    ///< n x m
  Matrix c;    ///< p x n
  Matrix d;    ///< p x m
  Matrix k;    ///< n x p (Kalman/innovation gain)
  Matrix eta;  ///< p x p innovation covariance

  Index n() const { return a.rows(); }
  Index m() const { return b.cols(); }
  Index p() const { return c.rows(); }

  void validate() const {
    if (a.rows() != a.cols()) throw DimensionError("model: A must be square");
    if (b.rows() != a.rows()) throw DimensionError("model: B row count != n");
    if (c.cols() != a.rows()) throw DimensionError("model: C column count != n");
    if (d.rows() != c.rows() || d.cols() != b.cols())
      throw DimensionError("model: D must be p x m");
    if (k.rows() != a.rows() || k.cols() != c.rows())
      throw DimensionError("model: K must be n x p");
    if (eta.rows() != c.rows() || eta.cols() != c.rows())
      throw DimensionError("model: eta must be p x p");
    if (!is_finite(a) || !is_finite(b) || !is_finite(c) || !is_finite(d) ||
        !is_finite(k) || !is_finite(eta))
      throw InputError("model: non-finite entry");
  }

  /// Eigenvalues of A (the model poles).
  ComplexVector poles() const {
    return Eigen::EigenSolver<Matrix>(a, /*computeEigenvectors=*/false)
        .eigenvalues();
  }

  /// Spectral radius of the predictor matrix A - K C.
  double predictor_spectral_radius() const {
    const Matrix akc = a - k * c;
    return Eigen::EigenSolver<Matrix>(akc, false)
        .eigenvalues()
        .cwiseAbs()
        .maxCoeff();
  }
};

/// Markov parameters G(0) = D, G(j) = C A^{j-1} B for j = 1..horizon.
inline std::vector<Matrix> markov_parameters(const StateSpaceModel& model,
                                             Index horizon) {
  model.validate();
  std::vector<Matrix> params;
  params.reserve(static_cast<std::size_t>(horizon) + 1);
  params.push_back(model.d);
  Matrix power = model.b;  // A^{j-1} B
  for (Index j = 1; j <= horizon; ++j) {
    params.push_back(model.c * power);
    power = model.a * power;
  }
  return params;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& rows, Index expect_rows,
                               Index expect_cols, const std::string& name) {
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(expect_rows))
    throw ParseError("model json: field '" + name + "' must have " +
                     std::to_string(expect_rows) + " rows");
  Matrix m(expect_rows, expect_cols);
  for (Index i = 0; i < expect_rows; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(expect_cols))
      throw ParseError("model json: field '" + name + "' row " +
                       std::to_string(i + 1) + " must have " +
                       std::to_string(expect_cols) + " entries");
    for (Index j = 0; j < expect_cols; ++j) {
      const auto& cell = row[static_cast<std::size_t>(j)];
      if (!cell.is_number())
        throw ParseError("model json: field '" + name + "' entry (" +
                         std::to_string(i + 1) + "," + std::to_string(j + 1) +
                         ") is not a number");
      m(i, j) = cell.get<double>();
    }
  }
  return m;
}

}  // namespace detail

constexpr const char* kModelFormatVersion = "frsid-model-1";

inline nlohmann::json model_to_json(const StateSpaceModel& model) {
  model.validate();
  nlohmann::json j;
  j["version"] = kModelFormatVersion;
  j["n"] = model.n();
  j["m"] = model.m();
  j["p"] = model.p();
  j["A"] = detail::matrix_to_json(model.a);
  j["B"] = detail::matrix_to_json(model.b);
  j["C"] = detail::matrix_to_json(model.c);
  j["D"] = detail::matrix_to_json(model.d);
  j["K"] = detail::matrix_to_json(model.k);
  j["eta"] = detail::matrix_to_json(model.eta);
  return j;
}

inline StateSpaceModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version") ||
      j["version"] != kModelFormatVersion)
    throw ParseError("model json: missing or unsupported version (expected " +
                     std::string(kModelFormatVersion) + ")");
  for (const char* field : {"n", "m", "p"})
    if (!j.contains(field) || !j[field].is_number_integer())
      throw ParseError("model json: missing integer field '" +
                       std::string(field) + "'");
  const Index n = j["n"].get<Index>();
  const Index m = j["m"].get<Index>();
  const Index p = j["p"].get<Index>();
  if (n < 1 || m < 1 || p < 1)
    throw ParseError("model json: n, m, p must be positive");
  StateSpaceModel model;
  model.a = detail::matrix_from_json(j.value("A", nlohmann::json()), n, n, "A");
  model.b = detail::matrix_from_json(j.value("B", nlohmann::json()), n, m, "B");
  model.c = detail::matrix_from_json(j.value("C", nlohmann::json()), p, n, "C");
  model.d = detail::matrix_from_json(j.value("D", nlohmann::json()), p, m, "D");
  model.k = detail::matrix_from_json(j.value("K", nlohmann::json()), n, p, "K");
  model.eta =
      detail::matrix_from_json(j.value("eta", nlohmann::json()), p, p, "eta");
  model.validate();
  return model;
}

inline void save_model(const StateSpaceModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("model json: cannot open for writing: " + path);
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw ParseError("model json: write failed: " + path);
}

inline StateSpaceModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model json: cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model json: " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace frsid

#include "kron/ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace kron {

using nlohmann::json;

std::string to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::gaussian: return "gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform: return "uniform";
  }
  return "gaussian";
}

EntryLaw entry_law_from_string(const std::string& name) {
  if (name == "gaussian") return EntryLaw::gaussian;
  if (name == "rademacher") return EntryLaw::rademacher;
  if (name == "uniform") return EntryLaw::uniform;
  throw InputError("unknown entry_law '" + name + "' (expected gaussian, rademacher or uniform)");
}

namespace {

bool has_imaginary_part(const Matrix& A) { return A.size() > 0 && A.imag().cwiseAbs().maxCoeff() > 1e-14; }

bool is_shape_violation(const Violation& v) {
  return v.message.find("dimension") != std::string::npos || v.message.find("beta") != std::string::npos;
}

std::string describe(const std::vector<Violation>& violations) {
  std::string out = "invalid ensemble:";
  for (const auto& v : violations) out += " [" + v.field + "] " + v.message + ";";
  return out;
}

}  // namespace

std::vector<Violation> find_violations(const StructureEnsemble& ens) {
  std::vector<Violation> out;
  if (ens.n < 1) {
    out.push_back({"n", "dimension n must be positive"});
    return out;
  }
  if (ens.beta != 1 && ens.beta != 2) out.push_back({"beta", "beta must be 1 or 2"});
  if (ens.K0.rows() != ens.n || ens.K0.cols() != ens.n) {
    out.push_back({"K0", "dimension mismatch: K0 must be n x n"});
  } else {
    if (!ens.K0.allFinite()) out.push_back({"K0", "non-finite entries"});
    if (!is_hermitian(ens.K0, 1e-12)) out.push_back({"K0", "K0 is not Hermitian"});
    if (ens.beta == 1 && has_imaginary_part(ens.K0)) out.push_back({"K0", "complex entries in the real (beta=1) class"});
  }
  for (int a = 0; a < ens.d(); ++a) {
    const std::string field = "L[" + std::to_string(a) + "]";
    const Matrix& L = ens.L[static_cast<std::size_t>(a)];
    if (L.rows() != ens.n || L.cols() != ens.n) {
      out.push_back({field, "dimension mismatch: structure matrix must be n x n"});
      continue;
    }
    if (!L.allFinite()) out.push_back({field, "non-finite entries"});
    if (ens.beta == 1 && has_imaginary_part(L)) out.push_back({field, "complex entries in the real (beta=1) class"});
  }
  return out;
}

ValidationError::ValidationError(ErrorKind kind, std::vector<Violation> violations)
    : Error(kind, describe(violations)), violations_(std::move(violations)) {}

const StructureEnsemble& validate(const StructureEnsemble& ens) {
  auto violations = find_violations(ens);
  if (violations.empty()) return ens;
  bool shape = false;
  for (const auto& v : violations) shape = shape || is_shape_violation(v);
  throw ValidationError(shape ? ErrorKind::input : ErrorKind::domain, std::move(violations));
}

namespace presets {

StructureEnsemble semicircle(int beta) {
  StructureEnsemble e;
  e.n = 1;
  e.beta = beta;
  e.K0 = Matrix::Zero(1, 1);
  e.L = {Matrix::Constant(1, 1, 1.0 / std::sqrt(2.0))};
  return e;
}

StructureEnsemble four_block(int beta) {
  const double s = 1.0 / std::sqrt(2.0);
  auto E = [](int i, int j) { return unit_matrix(4, i - 1, j - 1); };
  StructureEnsemble e;
  e.n = 4;
  e.beta = beta;
  e.K0 = Matrix::Zero(4, 4);
  e.L = {s * (E(1, 1) + E(1, 2) + E(2, 1) + E(3, 3)),
         s * E(2, 2),
         s * E(3, 3),
         s * E(4, 4),
         E(1, 2),
         E(2, 4) + E(3, 4),
         E(3, 4)};
  return e;
}

StructureEnsemble deterministic(const Matrix& K0, int beta) {
  StructureEnsemble e;
  e.n = static_cast<int>(K0.rows());
  e.beta = beta;
  e.K0 = K0;
  return e;
}

StructureEnsemble two_block(int beta) {
  const double s = 1.0 / std::sqrt(2.0);
  StructureEnsemble e;
  e.n = 2;
  e.beta = beta;
  e.K0 = Matrix(2, 2);
  e.K0 << 0.3, 0.2, 0.2, -0.3;
  e.L = {s * unit_matrix(2, 0, 0), s * unit_matrix(2, 1, 1), unit_matrix(2, 0, 1)};
  return e;
}

}  // namespace presets

namespace {

cplx parse_scalar(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_object()) {
    if (!v.contains("re") || !v["re"].is_number()) throw InputError(path + ": missing numeric \"re\"");
    double im = 0.0;
    if (v.contains("im")) {
      if (!v["im"].is_number()) throw InputError(path + ": \"im\" is not a number");
      im = v["im"].get<double>();
    }
    return {v["re"].get<double>(), im};
  }
  throw InputError(path + ": expected a number or {\"re\":..,\"im\":..}");
}

Matrix parse_matrix(const json& v, const std::string& path) {
  if (!v.is_array()) throw InputError(path + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = rows == 0 ? 0 : -1;
  for (const auto& row : v) {
    if (!row.is_array()) throw InputError(path + ": expected an array of rows");
    if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InputError(path + ": ragged rows");
  }
  Matrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      A(i, j) = parse_scalar(v[i][j], path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  return A;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix(std::ostringstream& os, const Matrix& A) {
  os << '[';
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (i) os << ',';
    os << '[';
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ',';
      os << "{\"re\":" << fmt(A(i, j).real()) << ",\"im\":" << fmt(A(i, j).imag()) << '}';
    }
    os << ']';
  }
  os << ']';
}

}  // namespace

StructureEnsemble parse_ensemble(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed ensemble JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("ensemble JSON must be an object");
  for (const char* key : {"n", "beta", "K0", "L"}) {
    if (!doc.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  }
  if (!doc["n"].is_number_integer()) throw InputError("n: expected an integer");
  if (!doc["beta"].is_number_integer()) throw InputError("beta: expected an integer");
  StructureEnsemble e;
  e.n = doc["n"].get<int>();
  e.beta = doc["beta"].get<int>();
  e.K0 = parse_matrix(doc["K0"], "K0");
  if (!doc["L"].is_array()) throw InputError("L: expected an array of matrices");
  for (std::size_t a = 0; a < doc["L"].size(); ++a)
    e.L.push_back(parse_matrix(doc["L"][a], "L[" + std::to_string(a) + "]"));
  if (doc.contains("d")) {
    if (!doc["d"].is_number_integer() || doc["d"].get<int>() != e.d())
      throw InputError("d: does not match the number of structure matrices");
  }
  if (doc.contains("entry_law")) {
    if (!doc["entry_law"].is_string()) throw InputError("entry_law: expected a string");
    e.entry_law = entry_law_from_string(doc["entry_law"].get<std::string>());
  }
  return e;
}

StructureEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ensemble file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_ensemble(buf.str());
}

std::string ensemble_to_json(const StructureEnsemble& ens) {
  std::ostringstream os;
  os << "{\"n\":" << ens.n << ",\"d\":" << ens.d() << ",\"beta\":" << ens.beta << ",\"K0\":";
  write_matrix(os, ens.K0);
  os << ",\"L\":[";
  for (int a = 0; a < ens.d(); ++a) {
    if (a) os << ',';
    write_matrix(os, ens.L[static_cast<std::size_t>(a)]);
  }
  os << "],\"entry_law\":\"" << to_string(ens.entry_law) << "\"}";
  return os.str();
}

std::string ensemble_hash(const StructureEnsemble& ens) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : ensemble_to_json(ens)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double support_radius(const StructureEnsemble& ens) {
  auto opnorm = [](const Matrix& A) { return A.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(A).singularValues()(0); };
  const double k = opnorm(ens.K0);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& L : ens.L) {
    const double l = opnorm(L);
    sum += l;
    sum_sq += l * l;
  }
  return std::max(2.0 + k + 2.0 * sum, k + 2.0 * std::sqrt(2.0 * sum_sq));
}

}  // namespace kron

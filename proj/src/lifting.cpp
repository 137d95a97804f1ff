#include "rkmpc/lifting.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include "rkmpc/rng.hpp"

namespace rkmpc::lifting {

namespace {

double kernel_value(KernelKind kind, double r2) {
  const double r = std::sqrt(r2);
  switch (kind) {
    case KernelKind::thinplate:
      return r2 > 0.0 ? r2 * std::log(r) : 0.0;  // continuous extension at r = 0
    case KernelKind::gaussian:
      return std::exp(-r2);
    case KernelKind::polyharmonic:
      return r2 > 0.0 ? r * std::log(r) : 0.0;
    case KernelKind::inverse_quadratic:
      return 1.0 / (1.0 + r2);
    default:
      throw Error("kernel_value: not a kernel kind");
  }
}

// d psi / dx = phi'(r)/r * (x - c); returns the scalar factor phi'(r)/r
// or NaN when undefined at r = 0.
double kernel_gradient_factor(KernelKind kind, double r2) {
  switch (kind) {
    case KernelKind::thinplate:
      // psi = r^2 log r, dpsi/dx = (2 log r + 1)(x - c); factor -> 0 as r -> 0
      return r2 > 0.0 ? (std::log(r2) + 1.0) : 0.0;  // log(r2) = 2 log r
    case KernelKind::gaussian:
      return -2.0 * std::exp(-r2);
    case KernelKind::polyharmonic:
      // psi = r log r, dpsi/dx = (log r + 1)/r (x - c); unbounded at r = 0
      return r2 > 0.0 ? (0.5 * std::log(r2) + 1.0) / std::sqrt(r2)
                      : std::numeric_limits<double>::quiet_NaN();
    case KernelKind::inverse_quadratic: {
      const double q = 1.0 + r2;
      return -2.0 / (q * q);
    }
    default:
      throw Error("kernel_gradient_factor: not a kernel kind");
  }
}

double monomial(const std::vector<int>& expo, const Vec& x) {
  double v = 1.0;
  for (size_t i = 0; i < expo.size(); ++i) v *= std::pow(x(static_cast<int>(i)), expo[i]);
  return v;
}

}  // namespace

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::thinplate: return "thinplate";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::polyharmonic: return "polyharmonic";
    case KernelKind::inverse_quadratic: return "inverse_quadratic";
    case KernelKind::polynomial: return "polynomial";
  }
  return "?";
}

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "thinplate") return KernelKind::thinplate;
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "polyharmonic") return KernelKind::polyharmonic;
  if (s == "inverse_quadratic") return KernelKind::inverse_quadratic;
  if (s == "polynomial") return KernelKind::polynomial;
  throw Error("unknown kernel kind: " + s);
}

std::string Dictionary::fingerprint() const {
  std::ostringstream os;
  os << to_string(kind) << ":" << state_dim << ":" << includes_state;
  for (const Vec& c : centers) {
    os << ";";
    for (int i = 0; i < c.size(); ++i) os << c(i) << ",";
  }
  for (const auto& e : poly_exponents) {
    os << "|";
    for (int v : e) os << v << ",";
  }
  return os.str();
}

Dictionary build_dictionary(KernelKind kind, const std::vector<Vec>& centers,
                            int state_dim, bool includes_state) {
  require(kind != KernelKind::polynomial,
          "build_dictionary: use build_polynomial_dictionary for the polynomial kind");
  require(state_dim >= 1, "build_dictionary: state_dim must be >= 1");
  require(!centers.empty() || includes_state,
          "build_dictionary: centers must be non-empty unless the state block is present");
  for (const Vec& c : centers)
    require_dims(c.size() == state_dim, "build_dictionary: center dimension mismatch");
  for (size_t i = 0; i < centers.size(); ++i)
    for (size_t j = i + 1; j < centers.size(); ++j)
      require((centers[i] - centers[j]).norm() > 1e-12,
              "build_dictionary: duplicate centers violate linear independence");
  if (kind == KernelKind::polyharmonic) {
    for (const Vec& c : centers)
      require(c.norm() > 1e-12,
              "build_dictionary: polyharmonic kernel has an unbounded gradient at its "
              "center, which Psi(0)=0 resetting would place at the origin");
  }

  Dictionary d;
  d.kind = kind;
  d.state_dim = state_dim;
  d.includes_state = includes_state;
  d.centers = centers;
  d.offsets.resize(static_cast<int>(centers.size()));
  for (size_t i = 0; i < centers.size(); ++i)
    d.offsets(static_cast<int>(i)) = kernel_value(kind, centers[i].squaredNorm());
  return d;
}

Dictionary build_polynomial_dictionary(int state_dim, int degree, bool includes_state) {
  require(state_dim >= 1, "build_polynomial_dictionary: state_dim must be >= 1");
  require(degree >= 1, "build_polynomial_dictionary: degree must be >= 1");
  Dictionary d;
  d.kind = KernelKind::polynomial;
  d.state_dim = state_dim;
  d.includes_state = includes_state;

  // all multi-indices with min_deg <= total degree <= degree, lexicographic
  const int min_deg = includes_state ? 2 : 1;
  std::vector<int> expo(state_dim, 0);
  while (true) {
    int i = state_dim - 1;
    while (i >= 0 && expo[i] == degree) {
      expo[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++expo[i];
    int total = 0;
    for (int v : expo) total += v;
    if (total >= min_deg && total <= degree) d.poly_exponents.push_back(expo);
  }
  require(!d.poly_exponents.empty() || includes_state,
          "build_polynomial_dictionary: empty basis");
  d.offsets = Vec::Zero(static_cast<int>(d.poly_exponents.size()));  // monomials vanish at 0
  return d;
}

Dictionary random_dictionary(KernelKind kind, int n_centers,
                             const geometry::HPolytope& X, uint64_t seed,
                             bool includes_state) {
  require(kind != KernelKind::polynomial, "random_dictionary: polynomial kind has no centers");
  const int n = X.dim();
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    auto hp = geometry::support(X, e);
    auto hm = geometry::support(X, -e);
    require(hp.has_value() && hm.has_value(), "random_dictionary: X must be bounded");
    hi(i) = *hp;
    lo(i) = -*hm;
  }
  const double min_gap = 1e-3 * (hi - lo).norm();

  auto gen = detail::stream_rng(seed, 0);
  std::vector<Vec> centers;
  int attempts = 0;
  while (static_cast<int>(centers.size()) < n_centers) {
    require(++attempts < 10000 * n_centers, "random_dictionary: rejection sampling failed");
    Vec c(n);
    for (int i = 0; i < n; ++i) c(i) = detail::uniform(gen, lo(i), hi(i));
    if (!geometry::contains(X, c)) continue;
    if (kind == KernelKind::polyharmonic && c.norm() < min_gap) continue;
    bool far = true;
    for (const Vec& prev : centers)
      if ((prev - c).norm() < min_gap) {
        far = false;
        break;
      }
    if (far) centers.push_back(c);
  }
  Dictionary d = build_dictionary(kind, centers, n, includes_state);
  d.seed = seed;
  return d;
}

Vec lift(const Dictionary& dict, const Vec& x) {
  require_dims(x.size() == dict.state_dim, "lift: state dimension mismatch");
  require(x.allFinite(), "lift: non-finite input");
  Vec s(dict.lifted_dim());
  int k = 0;
  if (dict.includes_state) {
    s.head(dict.state_dim) = x;
    k = dict.state_dim;
  }
  if (dict.kind == KernelKind::polynomial) {
    for (size_t i = 0; i < dict.poly_exponents.size(); ++i)
      s(k++) = monomial(dict.poly_exponents[i], x);
  } else {
    for (size_t i = 0; i < dict.centers.size(); ++i)
      s(k++) = kernel_value(dict.kind, (x - dict.centers[i]).squaredNorm()) -
               dict.offsets(static_cast<int>(i));
  }
  return s;
}

Mat lift_jacobian(const Dictionary& dict, const Vec& x) {
  require_dims(x.size() == dict.state_dim, "lift_jacobian: state dimension mismatch");
  Mat J = Mat::Zero(dict.lifted_dim(), dict.state_dim);
  int k = 0;
  if (dict.includes_state) {
    J.topRows(dict.state_dim) = Mat::Identity(dict.state_dim, dict.state_dim);
    k = dict.state_dim;
  }
  if (dict.kind == KernelKind::polynomial) {
    for (const auto& expo : dict.poly_exponents) {
      for (int j = 0; j < dict.state_dim; ++j) {
        if (expo[j] == 0) continue;
        double v = expo[j];
        for (int i = 0; i < dict.state_dim; ++i) {
          const int p = (i == j) ? expo[i] - 1 : expo[i];
          v *= std::pow(x(i), p);
        }
        J(k, j) = v;
      }
      ++k;
    }
  } else {
    for (const Vec& c : dict.centers) {
      const double f = kernel_gradient_factor(dict.kind, (x - c).squaredNorm());
      if (std::isfinite(f)) J.row(k) = f * (x - c).transpose();
      ++k;
    }
  }
  return J;
}

Mat lift_jacobian_fd(const Dictionary& dict, const Vec& x, double h) {
  Mat J(dict.lifted_dim(), dict.state_dim);
  for (int j = 0; j < dict.state_dim; ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (lift(dict, xp) - lift(dict, xm)) / (2.0 * h);
  }
  return J;
}

RankReport rank_check(const Dictionary& dict, const std::vector<Vec>& samples) {
  require(!samples.empty(), "rank_check: need at least one sample");
  RankReport rep;
  rep.min_rank = dict.state_dim;
  rep.worst_sigma_ratio = std::numeric_limits<double>::infinity();
  for (size_t si = 0; si < samples.size(); ++si) {
    const Vec& x = samples[si];
    if (dict.kind == KernelKind::polyharmonic) {
      bool hit = false;
      for (const Vec& c : dict.centers)
        if ((x - c).norm() < 1e-12) hit = true;
      if (hit) {
        rep.center_hits.push_back(static_cast<int>(si));
        continue;
      }
    }
    Mat J = lift_jacobian(dict, x);
    Eigen::JacobiSVD<Mat> svd(J);
    const Vec s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > 1e-10 * std::max(1.0, s(0))) ++rank;
    const double ratio = s(0) > 0 ? s(s.size() - 1) / s(0) : 0.0;
    if (rank < rep.min_rank || (rank == rep.min_rank && ratio < rep.worst_sigma_ratio)) {
      rep.worst_sample = x;
      rep.worst_sigma_ratio = ratio;
    }
    rep.min_rank = std::min(rep.min_rank, rank);
  }
  rep.pass = (rep.min_rank == dict.state_dim);
  return rep;
}

double lipschitz_estimate(const Dictionary& dict, const geometry::HPolytope& X,
                          int grid_per_dim) {
  const int n = X.dim();
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    hi(i) = geometry::support(X, e).value();
    lo(i) = -geometry::support(X, -e).value();
  }
  // largest Jacobian spectral norm over a regular grid
  double L = 0.0;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec x(n);
    for (int i = 0; i < n; ++i)
      x(i) = lo(i) + (hi(i) - lo(i)) * idx[i] / double(grid_per_dim - 1);
    if (geometry::contains(X, x)) {
      Eigen::JacobiSVD<Mat> svd(lift_jacobian(dict, x));
      L = std::max(L, svd.singularValues()(0));
    }
    int i = n - 1;
    while (i >= 0 && ++idx[i] == grid_per_dim) idx[i--] = 0;
    if (i < 0) break;
  }
  return L;
}

}  // namespace rkmpc::lifting

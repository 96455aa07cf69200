#include "bdex/velocity_set.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/LU>

#include "bdex/errors.hpp"

namespace bdex {

namespace {

bool contains(const std::vector<std::vector<double>>& set, const std::vector<double>& v,
              double tol) {
  return std::any_of(set.begin(), set.end(), [&](const std::vector<double>& w) {
    for (std::size_t j = 0; j < v.size(); ++j)
      if (std::abs(v[j] - w[j]) > tol) return false;
    return true;
  });
}

std::string show(const std::vector<double>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < v.size(); ++j) os << (j ? ", " : "") << v[j];
  os << ')';
  return os.str();
}

}  // namespace

VelocitySet VelocitySet::create(int dim, std::vector<std::vector<double>> velocities) {
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("velocity set: dimension must be in 1.." + std::to_string(kMaxDim));
  if (velocities.empty()) throw ConfigError("velocity set: empty");
  if (velocities.size() > kMaxVelocities)
    throw ConfigError("velocity set: at most " + std::to_string(kMaxVelocities) +
                      " velocities supported");
  constexpr double tol = 1e-12;
  for (const auto& v : velocities) {
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError("velocity set: velocity " + show(v) + " has wrong dimension");
    for (double c : v)
      if (!std::isfinite(c)) throw ConfigError("velocity set: non-finite coordinate");
  }
  for (std::size_t i = 0; i < velocities.size(); ++i)
    for (std::size_t j = i + 1; j < velocities.size(); ++j)
      if (contains({velocities[i]}, velocities[j], tol))
        throw ConfigError("velocity set: duplicate velocity " + show(velocities[j]));

  std::vector<int> perm(dim);
  for (const auto& v : velocities) {
    for (int i = 0; i < dim; ++i) {
      auto flipped = v;
      flipped[i] = -flipped[i];
      if (!contains(velocities, flipped, tol))
        throw ConfigError("velocity set: not closed under reflection, missing " + show(flipped));
    }
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<double> permuted(dim);
      for (int i = 0; i < dim; ++i) permuted[i] = v[perm[i]];
      if (!contains(velocities, permuted, tol))
        throw ConfigError("velocity set: not closed under permutation, missing " + show(permuted));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  VelocitySet out;
  out.dim_ = dim;
  out.count_ = velocities.size();
  out.breve_v_ = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd lifted(dim + 1, velocities.size());
  for (std::size_t i = 0; i < velocities.size(); ++i) {
    StateVec l(dim + 1);
    l[0] = 1.0;
    for (int j = 0; j < dim; ++j) {
      out.coords_.push_back(velocities[i][j]);
      l[j + 1] = velocities[i][j];
    }
    out.lifted_.push_back(l);
    lifted.col(static_cast<Eigen::Index>(i)) = l;
    out.breve_v_ = std::max(out.breve_v_, velocities[i][0]);
  }
  if (Eigen::FullPivLU<Eigen::MatrixXd>(lifted).rank() != dim + 1)
    throw ConfigError("velocity set: vectors (1, v) do not span R^{d+1}");
  return out;
}

VelocitySet VelocitySet::parse(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  int dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("velocity table line " + std::to_string(lineno) + ": bad number '" +
                          tok + "'");
      }
    }
    if (row.empty()) continue;
    if (dim == 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw ConfigError("velocity table line " + std::to_string(lineno) + ": expected " +
                        std::to_string(dim) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("velocity table: no velocities");
  return create(dim, std::move(rows));
}

VelocitySet VelocitySet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open velocity table '" + path + "'");
  return parse(in);
}

VelocitySet VelocitySet::symmetric_pair(double v) { return create(1, {{v}, {-v}}); }

double VelocitySet::max_l1() const {
  double best = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += std::abs(component(i, j));
    best = std::max(best, s);
  }
  return best;
}

std::optional<std::size_t> VelocitySet::index_of(std::span<const double> v, double tol) const {
  if (static_cast<int>(v.size()) != dim_) return std::nullopt;
  for (std::size_t i = 0; i < count_; ++i) {
    bool same = true;
    for (int j = 0; j < dim_ && same; ++j) same = std::abs(component(i, j) - v[j]) <= tol;
    if (same) return i;
  }
  return std::nullopt;
}

VelocitySet VelocitySet::scaled(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("velocity set: scale factor must be positive");
  std::vector<std::vector<double>> rows(count_);
  for (std::size_t i = 0; i < count_; ++i)
    for (int j = 0; j < dim_; ++j) rows[i].push_back(component(i, j) * factor);
  return create(dim_, std::move(rows));
}

void VelocitySet::write(std::ostream& out) const {
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < count_; ++i) {
    for (int j = 0; j < dim_; ++j) out << (j ? " " : "") << component(i, j);
    out << '\n';
  }
  out.precision(old);
}

bool Collision::is_active() const {
  if (v == w || v_out == w_out) return false;
  return v != v_out && v != w_out && w != v_out && w != w_out;
}

CollisionSet::CollisionSet(const VelocitySet& vs, double tol) {
  const std::size_t n = vs.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t e = 0; e < n; ++e) {
          bool conserves = true;
          for (int j = 0; j < vs.dim() && conserves; ++j)
            conserves = std::abs(vs.component(a, j) + vs.component(b, j) - vs.component(c, j) -
                                 vs.component(e, j)) <= tol;
          if (!conserves) continue;
          Collision q{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                      static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(e)};
          all_.push_back(q);
          if (q.is_active()) active_.push_back(q);
        }
}

}  // namespace bdex

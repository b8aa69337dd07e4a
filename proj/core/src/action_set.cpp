#include <limits>
#include "dosp/action_set.hpp"

#include <cmath>

#include "dosp/errors.hpp"

namespace dosp {

ActionSet ActionSet::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw DimensionMismatch("box bounds must be nonempty and of equal size");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) ||
        !(lower[k] <= upper[k])) {
      throw InvalidArgument("box requires finite bounds with lower <= upper");
    }
  }
  return ActionSet(Kind::kBox, std::move(lower), std::move(upper), 0.0);
}

ActionSet ActionSet::ball(Vec center, double radius) {
  if (center.size() == 0) throw DimensionMismatch("ball center is empty");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("ball radius must be positive and finite");
  }
  Vec unused = Vec::Zero(center.size());
  return ActionSet(Kind::kBall, std::move(center), std::move(unused), radius);
}

ActionSet ActionSet::symmetric_box(Eigen::Index dim, double half_width) {
  return box(Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width));
}

Vec ActionSet::project(const Vec& y) const {
  Vec out = y;
  project_in_place(out);
  return out;
}

void ActionSet::project_in_place(Vec& y) const {
  if (y.size() != dim()) throw DimensionMismatch("projection dimension mismatch");
  if (kind_ == Kind::kBox) {
    y = y.cwiseMax(a_).cwiseMin(b_);
    return;
  }
  Vec d = y - a_;
  double r = d.norm();
  // A few ulps of slack keep the projection idempotent after rounding.
  if (r > radius_ * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
    y = a_ + d * (radius_ / r);
  }
}

bool ActionSet::contains(const Vec& y, double tol) const {
  if (y.size() != dim()) return false;
  if (kind_ == Kind::kBox) {
    return ((y - a_).array() >= -tol).all() && ((b_ - y).array() >= -tol).all();
  }
  return (y - a_).norm() <= radius_ + tol;
}

double ActionSet::max_distance_to(const Vec& p) const {
  if (p.size() != dim()) throw DimensionMismatch("dimension mismatch");
  if (kind_ == Kind::kBox) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < dim(); ++k) {
      double m = std::max(std::abs(p[k] - a_[k]), std::abs(b_[k] - p[k]));
      s += m * m;
    }
    return std::sqrt(s);
  }
  return (p - a_).norm() + radius_;
}

double ActionSet::diameter() const {
  if (kind_ == Kind::kBox) return (b_ - a_).norm();
  return 2.0 * radius_;
}

}  // namespace dosp

#pragma once

#include "dosp/linalg.hpp"

namespace dosp {

// Compact convex action set shared by every agent: an axis-aligned box or a
// Euclidean ball.
class ActionSet {
 public:
  enum class Kind { kBox, kBall };

  static ActionSet box(Vec lower, Vec upper);
  static ActionSet ball(Vec center, double radius);
  // [-half_width, half_width]^dim
  static ActionSet symmetric_box(Eigen::Index dim, double half_width);

  Kind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return a_.size(); }

  const Vec& lower() const noexcept { return a_; }
  const Vec& upper() const noexcept { return b_; }
  const Vec& center() const noexcept { return a_; }
  double radius() const noexcept { return radius_; }

  // Euclidean-nearest point of the set.
  Vec project(const Vec& y) const;
  void project_in_place(Vec& y) const;
  bool contains(const Vec& y, double tol = 0.0) const;

  // max over x in the set of ||x - p||.
  double max_distance_to(const Vec& p) const;
  // max over x in the set of ||x||.
  double max_norm() const { return max_distance_to(Vec::Zero(dim())); }
  double diameter() const;

 private:
  ActionSet(Kind kind, Vec a, Vec b, double radius)
      : kind_(kind), a_(std::move(a)), b_(std::move(b)), radius_(radius) {}

  Kind kind_;
  Vec a_;  // box: lower, ball: center
  Vec b_;  // box: upper, ball: unused
  double radius_ = 0.0;
};

}  // namespace dosp

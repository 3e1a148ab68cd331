#ifndef HISTO_DISTANCES_HPP
#define HISTO_DISTANCES_HPP

#include "histo/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace histo {

enum class DistanceKind { L1, L2, Cosine, Correlation, ChiSquared, Hutchinson };

/// Canonical order; also the tie order for best-over-distances selection.
inline constexpr DistanceKind kAllDistanceKinds[] = {
    DistanceKind::L1,          DistanceKind::L2,         DistanceKind::Cosine,
    DistanceKind::Correlation, DistanceKind::ChiSquared, DistanceKind::Hutchinson};

inline std::string_view to_token(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::L1: return "l1";
    case DistanceKind::L2: return "l2";
    case DistanceKind::Cosine: return "cosine";
    case DistanceKind::Correlation: return "correlation";
    case DistanceKind::ChiSquared: return "chi2";
    case DistanceKind::Hutchinson: return "hutchinson";
  }
  return "";
}

inline std::optional<DistanceKind> parse_distance_kind(std::string_view token) {
  for (auto k : kAllDistanceKinds)
    if (to_token(k) == token) return k;
  return std::nullopt;
}

inline constexpr double kChiSquaredEpsilon = 1e-10;

namespace detail {

template <typename P, typename Q>
void check_lengths(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "lengths " + std::to_string(p.size()) + " and " + std::to_string(q.size()));
  }
  if (p.size() == 0) throw Error(ErrorKind::LengthMismatch, "empty vectors");
}

}  // namespace detail

template <typename P, typename Q>
typename P::Scalar l1_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  detail::check_lengths(p, q);
  return (p - q).cwiseAbs().sum();
}

template <typename P, typename Q>
typename P::Scalar l2_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  detail::check_lengths(p, q);
  return (p - q).norm();
}

template <typename P, typename Q>
typename P::Scalar cosine_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  using S = typename P::Scalar;
  detail::check_lengths(p, q);
  const S np = p.norm(), nq = q.norm();
  if (np == S(0) || nq == S(0)) throw Error(ErrorKind::UndefinedDistance, "cosine of a zero vector");
  return std::clamp(S(1) - p.dot(q) / (np * nq), S(0), S(2));
}

template <typename P, typename Q>
typename P::Scalar correlation_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  using S = typename P::Scalar;
  detail::check_lengths(p, q);
  const auto pc = (p.array() - p.mean()).matrix().eval();
  const auto qc = (q.array() - q.mean()).matrix().eval();
  const S np = pc.norm(), nq = qc.norm();
  if (np == S(0) || nq == S(0)) {
    throw Error(ErrorKind::UndefinedDistance, "correlation of a constant vector");
  }
  return std::clamp(S(1) - pc.dot(qc) / (np * nq), S(0), S(2));
}

template <typename P, typename Q>
typename P::Scalar chi_squared_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  using S = typename P::Scalar;
  detail::check_lengths(p, q);
  return S(0.5) * ((p - q).array().square() / (p.array() + q.array() + S(kChiSquaredEpsilon))).sum();
}

/// One-dimensional Monge-Kantorovich (earth mover's) distance with unit bin spacing.
/// Both inputs are normalised to unit mass; O(n) through a running prefix sum.
template <typename P, typename Q>
typename P::Scalar hutchinson_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  using S = typename P::Scalar;
  detail::check_lengths(p, q);
  const S mp = p.sum(), mq = q.sum();
  if (!(mp > S(0)) || !(mq > S(0))) throw Error(ErrorKind::ZeroMass, "histogram has no mass");
  S carried = 0, cost = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    carried += p[i] / mp - q[i] / mq;
    cost += std::abs(carried);
  }
  return cost;
}

template <typename P, typename Q>
typename P::Scalar distance(DistanceKind kind, const Eigen::MatrixBase<P>& p,
                            const Eigen::MatrixBase<Q>& q) {
  switch (kind) {
    case DistanceKind::L1: return l1_distance(p, q);
    case DistanceKind::L2: return l2_distance(p, q);
    case DistanceKind::Cosine: return cosine_distance(p, q);
    case DistanceKind::Correlation: return correlation_distance(p, q);
    case DistanceKind::ChiSquared: return chi_squared_distance(p, q);
    case DistanceKind::Hutchinson: return hutchinson_distance(p, q);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown distance kind");
}

}  // namespace histo

#endif  // HISTO_DISTANCES_HPP

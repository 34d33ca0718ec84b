#include "swedge/mixed_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "swedge/error.hpp"

namespace swedge {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

MeansModel::MeansModel(const DesignLayout& layout, FitModel model, const Eigen::MatrixXd& sizes)
    : model_(model), T_(layout.periods()), m_(layout.interventions()), sizes_(sizes) {
  if (sizes.rows() != layout.clusters() || sizes.cols() != T_)
    throw InvalidArgument("cell size table must be I x T");
  if (sizes.minCoeff() < 1.0) throw InvalidArgument("every cluster-period needs at least 1 observation");

  const int L = T_ - 1;
  const int treat = model == FitModel::B ? m_ * L : m_;
  p_ = T_ + treat;
  q_ = model == FitModel::C ? m_ * L : 0;
  n_total_ = sizes.sum();
  sum_log_n_ = sizes.array().log().sum();
  if (n_total_ <= p_) throw InvalidArgument("fewer observations than fixed effects");

  const auto tms = matrices(layout);
  const int width = p_ + q_;
  g_sum_ = Eigen::MatrixXd::Zero(width, width);
  for (int i = 0; i < layout.clusters(); ++i) {
    Eigen::MatrixXd d(T_, width);
    d.leftCols(T_).setIdentity();
    d.middleCols(T_, treat) = model == FitModel::B ? tms[i].z : tms[i].x;
    if (q_ > 0) d.rightCols(q_) = tms[i].z;
    const Eigen::VectorXd n = sizes.row(i).transpose();
    const Eigen::MatrixXd dn = n.asDiagonal() * d;
    const Eigen::VectorXd k = dn.colwise().sum().transpose();
    g_sum_ += d.transpose() * dn;
    const double s = n.sum();

    int g = 0;
    while (g < static_cast<int>(groups_.size()) && groups_[g].s != s) ++g;
    if (g == static_cast<int>(groups_.size())) {
      Group grp;
      grp.s = s;
      grp.kk = Eigen::MatrixXd::Zero(width, width);
      grp.kt = Eigen::VectorXd::Zero(width);
      groups_.push_back(std::move(grp));
    }
    groups_[g].count += 1.0;
    groups_[g].kk += k * k.transpose();
    group_of_.push_back(g);
    design_.push_back(std::move(d));
  }
  a_sum_ = Eigen::VectorXd::Zero(width);
}

void MeansModel::set_data(const CellMeans& means) {
  if (means.mean.rows() != sizes_.rows() || means.mean.cols() != sizes_.cols())
    throw InvalidArgument("cell means do not match the model's layout");
  if (means.n != sizes_) throw InvalidArgument("cell sizes differ from the ones the model was built with");
  a_sum_.setZero();
  yy_sum_ = 0.0;
  for (auto& g : groups_) {
    g.kt.setZero();
    g.tt = 0.0;
  }
  for (std::size_t i = 0; i < design_.size(); ++i) {
    const Eigen::VectorXd ny = sizes_.row(i).transpose().cwiseProduct(means.mean.row(i).transpose());
    const Eigen::VectorXd a = design_[i].transpose() * ny;
    const double t = ny.sum();
    a_sum_ += a;
    yy_sum_ += ny.dot(means.mean.row(i).transpose());
    Group& g = groups_[group_of_[i]];
    // k_i t_i: k_i is recomputed from the design to keep the group sums exact.
    g.kt += (design_[i].transpose() * sizes_.row(i).transpose()) * t;
    g.tt += t * t;
  }
  within_ss_ = means.within_ss;
  has_data_ = true;
}

MeansModel::Pieces MeansModel::assemble(const Eigen::VectorXd& psi, bool keep_random) const {
  if (!has_data_) throw InvalidArgument("no data loaded");
  if (psi.size() != parameter_count())
    throw InvalidArgument("expected " + std::to_string(parameter_count()) + " variance parameters");
  const double pa = psi(0);
  Eigen::MatrixXd m = g_sum_;
  Eigen::VectorXd mv = a_sum_;
  double yy = yy_sum_;
  double logdet_v = 0.0;
  for (const auto& g : groups_) {
    const double c = pa / (1.0 + pa * g.s);
    m.noalias() -= c * g.kk;
    mv.noalias() -= c * g.kt;
    yy -= c * g.tt;
    logdet_v += g.count * std::log1p(pa * g.s);
  }

  Pieces out;
  if (q_ == 0) {
    out.q = std::move(m);
    out.fy = std::move(mv);
    out.yy = yy;
    out.logdet_v = logdet_v;
    return out;
  }

  const int L = T_ - 1;
  Eigen::VectorXd sp(q_);
  for (int k = 0; k < m_; ++k) sp.segment(k * L, L).setConstant(std::sqrt(psi(1 + k)));
  const auto m_uu = m.bottomRightCorner(q_, q_);
  const Eigen::MatrixXd s_uf = sp.asDiagonal() * m.bottomLeftCorner(q_, p_);
  const Eigen::VectorXd s_uy = sp.cwiseProduct(mv.tail(q_));
  Eigen::MatrixXd l = sp.asDiagonal() * m_uu * sp.asDiagonal();
  l.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(l);
  if (llt.info() != Eigen::Success) throw NumericalError("random-effect system is not positive definite");
  const Eigen::MatrixXd r_uf = llt.solve(s_uf);
  const Eigen::VectorXd r_uy = llt.solve(s_uy);
  logdet_v += 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  out.q = m.topLeftCorner(p_, p_) - s_uf.transpose() * r_uf;
  out.fy = mv.head(p_) - s_uf.transpose() * r_uy;
  out.yy = yy - s_uy.dot(r_uy);
  out.logdet_v = logdet_v;
  if (keep_random) {
    out.l_solve_uf = r_uf;
    out.l_solve_uy = r_uy;
    out.sqrt_psi = sp;
  }
  return out;
}

MeansSolution MeansModel::solve(const Eigen::VectorXd& psi, Method method) const {
  Pieces pc = assemble(psi, true);
  Eigen::LLT<Eigen::MatrixXd> llt(pc.q);
  if (llt.info() != Eigen::Success)
    throw NumericalError("fixed-effect normal matrix is not positive definite");
  MeansSolution sol;
  sol.fixed = llt.solve(pc.fy);
  sol.fixed_cov_rel = llt.solve(Eigen::MatrixXd::Identity(p_, p_));
  sol.logdet_q = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  sol.logdet_v = pc.logdet_v;
  sol.rss = within_ss_ + pc.yy - pc.fy.dot(sol.fixed);
  sol.rss = std::max(sol.rss, 0.0);
  const double dof = method == Method::reml ? n_total_ - p_ : n_total_;
  sol.sigma2_hat = sol.rss / dof;
  if (q_ > 0) {
    // gamma = Psi^{1/2} L^{-1} Psi^{1/2} U'B^{-1}(y - F beta)
    sol.random = pc.sqrt_psi.cwiseProduct(pc.l_solve_uy - pc.l_solve_uf * sol.fixed);
  }
  return sol;
}

double MeansModel::deviance(const Eigen::VectorXd& psi, Method method) const {
  const Pieces pc = assemble(psi, false);
  Eigen::LLT<Eigen::MatrixXd> llt(pc.q);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd beta = llt.solve(pc.fy);
  const double rss = within_ss_ + pc.yy - pc.fy.dot(beta);
  if (!(rss > 0.0)) return std::numeric_limits<double>::infinity();
  if (method == Method::ml) {
    return n_total_ * (kLog2Pi + std::log(rss / n_total_) + 1.0) + pc.logdet_v;
  }
  const double dof = n_total_ - p_;
  const double logdet_q = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return dof * (kLog2Pi + std::log(rss / dof) + 1.0) + pc.logdet_v + logdet_q;
}

double MeansModel::deviance(const VarianceComponents& vc, Method method) const {
  vc.validate();
  Eigen::VectorXd psi(parameter_count());
  psi(0) = vc.cluster / vc.residual;
  if (model_ == FitModel::C) {
    if (static_cast<int>(vc.treatment.size()) != m_)
      throw InvalidArgument("Model C needs one treatment variance per intervention");
    for (int k = 0; k < m_; ++k) psi(1 + k) = vc.treatment[k] / vc.residual;
  }
  const Pieces pc = assemble(psi, false);
  Eigen::LLT<Eigen::MatrixXd> llt(pc.q);
  if (llt.info() != Eigen::Success) throw NumericalError("fixed-effect normal matrix is not positive definite");
  const Eigen::VectorXd beta = llt.solve(pc.fy);
  const double rss = within_ss_ + pc.yy - pc.fy.dot(beta);
  const double s2 = vc.residual;
  if (method == Method::ml)
    return n_total_ * (kLog2Pi + std::log(s2)) + pc.logdet_v + rss / s2;
  const double dof = n_total_ - p_;
  const double logdet_q = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return dof * (kLog2Pi + std::log(s2)) + pc.logdet_v + logdet_q + rss / s2;
}

}  // namespace swedge

// SPDX-License-Identifier: Apache-2.0
//
// charm: radio-map-aided channel estimation for pilot-starved MIMO-OFDM
// Copyright (C) 2026 The charm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "charm/baselines.hpp"
#include "charm/adps.hpp"
#include "charm/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace charm
{

namespace
{

using clock_type = std::chrono::steady_clock;

double elapsed_ms(clock_type::time_point start)
{
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

CVector flatten(const std::vector<CMatrix> &per_subcarrier)
{
    Eigen::Index total = 0;
    for (const auto &m : per_subcarrier)
        total += m.size();
    CVector out(total);
    Eigen::Index offset = 0;
    for (const auto &m : per_subcarrier)
    {
        out.segment(offset, m.size()) = Eigen::Map<const CVector>(m.data(), m.size());
        offset += m.size();
    }
    return out;
}

void unflatten(const CVector &flat, std::vector<CMatrix> &per_subcarrier)
{
    Eigen::Index offset = 0;
    for (auto &m : per_subcarrier)
    {
        Eigen::Map<CVector>(m.data(), m.size()) = flat.segment(offset, m.size());
        offset += m.size();
    }
}

// Incremental least squares over a growing set of columns. Rejects a column that
// makes the Gram matrix numerically singular.
class GreedyRefit
{
public:
    GreedyRefit(Eigen::Index rows, int capacity) : basis_(rows, capacity), gram_(capacity, capacity), rhs_(capacity) {}

    int size() const { return count_; }
    const CMatrix &basis() const { return basis_; }
    const CVector &coefficients() const { return coef_; }

    bool push(const CVector &column, const CVector &target)
    {
        const int s = count_;
        basis_.col(s) = column;
        gram_.block(0, s, s + 1, 1).noalias() = basis_.leftCols(s + 1).adjoint() * column;
        gram_.block(s, 0, 1, s) = gram_.block(0, s, s, 1).adjoint();
        rhs_[s] = column.dot(target);

        const CMatrix g = gram_.topLeftCorner(s + 1, s + 1);
        Eigen::LLT<CMatrix> llt(g);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-12)
            return false;
        coef_ = llt.solve(rhs_.head(s + 1));
        ++count_;
        return true;
    }

    CVector residual(const CVector &target) const
    {
        return target - basis_.leftCols(count_) * coef_;
    }

private:
    CMatrix basis_;
    CMatrix gram_;
    CVector rhs_;
    CVector coef_;
    int count_ = 0;
};

} // namespace

int Omp3dConfig::resolved_iterations(const SystemConfig &cfg) const
{
    const int n = max_iterations == 0 ? default_max_paths(cfg) : max_iterations;
    if (n < 1)
        throw ConfigError("Omp3dConfig: max_iterations must be >= 1");
    return n;
}

Omp3dScorer::Omp3dScorer(const SystemConfig &cfg, const PilotMatrix &x)
    : cfg_(cfg), pilots_(x.length()), aod_(AodDictionary::build(cfg, x))
{
    cfg_.validate();
    rx_atoms_.resize(cfg.n_rx, cfg.g_theta);
    for (int i = 0; i < cfg.g_theta; ++i)
        rx_atoms_.col(i) = steering_vector_sin(cfg.n_rx, cfg.aoa_grid_u(i));
    delay_fwd_.resize(cfg.n_subcarriers, cfg.g_tau);
    for (int j = 0; j < cfg.g_tau; ++j)
        for (int k = 0; k < cfg.n_subcarriers; ++k)
            delay_fwd_(k, j) = std::polar(1.0, 2.0 * pi * k * cfg.subcarrier_spacing * cfg.delay_grid(j));
    aod_conj_ = aod_.u.conjugate();
    inv_norm_.resize(cfg.g_phi);
    for (int g = 0; g < cfg.g_phi; ++g)
        inv_norm_[g] = aod_.excluded(g) ? 0.0 : 1.0 / (cfg.n_subcarriers * aod_.norm2[g]);
}

template <class Visit> void Omp3dScorer::visit_scores(const std::vector<CMatrix> &residual, Visit &&visit) const
{
    const int gt = cfg_.g_theta;
    const int K = cfg_.n_subcarriers;
    if (static_cast<int>(residual.size()) != K)
        throw ConfigError("Omp3dScorer: residual subcarrier count mismatch");

    // Receive-side correlations, stacked as rows (t, i) over columns k.
    CMatrix stacked(static_cast<Eigen::Index>(pilots_) * gt, K);
    CMatrix corr(gt, pilots_);
    for (int k = 0; k < K; ++k)
    {
        corr.noalias() = rx_atoms_.adjoint() * residual[k];
        for (int t = 0; t < pilots_; ++t)
            stacked.col(k).segment(static_cast<Eigen::Index>(t) * gt, gt) = corr.col(t);
    }
    // Delay-domain transform across subcarriers.
    const CMatrix delayed = stacked * delay_fwd_;

    // Pilot-side correlation per delay bin, in AoD blocks that stay cache resident.
    constexpr int block = 32;
    CMatrix per_delay(gt, pilots_);
    CMatrix s(gt, block);
    Eigen::MatrixXd power(gt, block);
    for (int j = 0; j < cfg_.g_tau; ++j)
    {
        for (int t = 0; t < pilots_; ++t)
            per_delay.col(t) = delayed.col(j).segment(static_cast<Eigen::Index>(t) * gt, gt);
        for (int g0 = 0; g0 < cfg_.g_phi; g0 += block)
        {
            const int nb = std::min(block, cfg_.g_phi - g0);
            s.leftCols(nb).noalias() = per_delay * aod_conj_.middleCols(g0, nb);
            power.leftCols(nb) = s.leftCols(nb).cwiseAbs2() * inv_norm_.segment(g0, nb).asDiagonal();
            visit(j, g0, nb, power);
        }
    }
}

Omp3dScorer::Best Omp3dScorer::best(const std::vector<CMatrix> &residual) const
{
    Best b;
    const int gt = cfg_.g_theta;
    visit_scores(residual, [&](int j, int g0, int nb, const Eigen::MatrixXd &power) {
        // Strict comparison in (j, g, i) visiting order keeps the lowest index on ties.
        const double *p = power.data();
        for (int c = 0; c < nb; ++c)
            for (int i = 0; i < gt; ++i, ++p)
                if (*p > b.score)
                    b = {i, g0 + c, j, *p};
    });
    if (b.g >= 0 && aod_.excluded(b.g))
        b = {};
    return b;
}

std::vector<double> Omp3dScorer::scores(const std::vector<CMatrix> &residual) const
{
    std::vector<double> out(static_cast<std::size_t>(cfg_.g_theta) * cfg_.g_phi * cfg_.g_tau, 0.0);
    const std::size_t gt = cfg_.g_theta;
    const std::size_t gp = cfg_.g_phi;
    visit_scores(residual, [&](int j, int g0, int nb, const Eigen::MatrixXd &power) {
        for (int c = 0; c < nb; ++c)
            for (std::size_t i = 0; i < gt; ++i)
                out[i + gt * (g0 + c + gp * j)] = power(static_cast<Eigen::Index>(i), c);
    });
    return out;
}

CVector Omp3dScorer::response(int i, int g, int j) const
{
    const Eigen::Index block = static_cast<Eigen::Index>(pilots_) * cfg_.n_rx;
    CVector out(block * cfg_.n_subcarriers);
    const double tau = cfg_.delay_grid(j);
    for (int k = 0; k < cfg_.n_subcarriers; ++k)
    {
        const cdouble phase = std::polar(1.0, -2.0 * pi * k * cfg_.subcarrier_spacing * tau);
        for (int t = 0; t < pilots_; ++t)
            out.segment(k * block + static_cast<Eigen::Index>(t) * cfg_.n_rx, cfg_.n_rx) =
                rx_atoms_.col(i) * (aod_.u(t, g) * phase);
    }
    return out;
}

EstimateResult joint_omp_3d(const SystemConfig &cfg, const RxObservations &y, const PilotMatrix &x,
                            const Omp3dConfig &ocfg, OmpTrace *trace)
{
    const auto start = clock_type::now();
    if (y.n_subcarriers() != cfg.n_subcarriers || y.pilot_length() != x.length())
        throw ConfigError("joint_omp_3d: observation dimensions do not match the configuration");
    const int iterations = ocfg.resolved_iterations(cfg);

    const Omp3dScorer scorer(cfg, x);
    const CVector target = flatten(y.y);
    const double n_obs = static_cast<double>(target.size());
    const double floor = std::max(ocfg.floor_scale * n_obs * y.noise_variance, 1e-20 * target.squaredNorm());

    GreedyRefit refit(target.size(), iterations);
    std::vector<Omp3dScorer::Best> chosen;
    std::vector<CMatrix> residual = y.y;
    CVector flat_residual = target;
    double energy = flat_residual.squaredNorm();
    std::vector<double> history{energy};

    while (refit.size() < iterations && energy > floor)
    {
        const auto atom = scorer.best(residual);
        if (atom.g < 0 || !(atom.score > 0.0))
            break;
        if (!refit.push(scorer.response(atom.i, atom.g, atom.j), target))
            break; // Gram singular: drop the newest atom and stop
        chosen.push_back(atom);
        flat_residual = refit.residual(target);
        unflatten(flat_residual, residual);
        energy = flat_residual.squaredNorm();
        history.push_back(energy);
    }

    EstimateResult result;
    result.support_size = refit.size();
    result.condition_number = std::numeric_limits<double>::quiet_NaN();
    for (int s = 0; s < refit.size(); ++s)
    {
        PathEstimate est;
        est.aod_index = chosen[s].g;
        est.u_aod = cfg.aod_grid_u(chosen[s].g);
        est.aod = std::asin(est.u_aod);
        est.u_aoa = cfg.aoa_grid_u(chosen[s].i);
        est.delay = cfg.delay_grid(chosen[s].j);
        est.gain = refit.coefficients()[s];
        result.paths.push_back(est);
    }
    result.h_hat = result.paths.empty() ? ChannelTensor::zeros(cfg) : reconstruct(cfg, result.paths);
    result.online_ms = elapsed_ms(start);

    if (trace)
    {
        trace->atoms = chosen;
        trace->residual_energy = history;
        trace->responses = refit.basis().leftCols(refit.size());
        trace->residual = flat_residual;
    }
    return result;
}

EstimateResult kron_omp(const SystemConfig &cfg, const RxObservations &y, const PilotMatrix &x,
                        const Omp3dConfig &ocfg)
{
    const auto start = clock_type::now();
    if (y.n_subcarriers() != cfg.n_subcarriers || y.pilot_length() != x.length())
        throw ConfigError("kron_omp: observation dimensions do not match the configuration");
    const int iterations = ocfg.resolved_iterations(cfg);
    const int n_pilots = x.length();

    CMatrix rx_atoms(cfg.n_rx, cfg.g_theta);
    for (int i = 0; i < cfg.g_theta; ++i)
        rx_atoms.col(i) = steering_vector_sin(cfg.n_rx, cfg.aoa_grid_u(i));
    CMatrix tx_atoms_h(cfg.g_phi, cfg.n_tx);
    for (int g = 0; g < cfg.g_phi; ++g)
        tx_atoms_h.row(g) = steering_vector_sin(cfg.n_tx, cfg.aod_grid_u(g)).adjoint();
    const AodDictionary aod = AodDictionary::build(cfg, x);
    const CMatrix aod_conj = aod.u.conjugate();
    Eigen::VectorXd inv_norm(cfg.g_phi);
    for (int g = 0; g < cfg.g_phi; ++g)
        inv_norm[g] = aod.excluded(g) ? 0.0 : 1.0 / aod.norm2[g];

    EstimateResult result;
    result.h_hat = ChannelTensor::zeros(cfg);
    result.condition_number = std::numeric_limits<double>::quiet_NaN();
    const Eigen::Index n_obs = static_cast<Eigen::Index>(cfg.n_rx) * n_pilots;
    CMatrix corr(cfg.g_theta, n_pilots);
    CMatrix s(cfg.g_theta, cfg.g_phi);

    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        const CVector target = Eigen::Map<const CVector>(y.y[k].data(), n_obs);
        const double floor =
            std::max(ocfg.floor_scale * static_cast<double>(n_obs) * y.noise_variance, 1e-20 * target.squaredNorm());
        GreedyRefit refit(n_obs, iterations);
        std::vector<std::pair<int, int>> chosen;
        CVector residual = target;
        double energy = residual.squaredNorm();

        while (refit.size() < iterations && energy > floor)
        {
            const Eigen::Map<const CMatrix> r(residual.data(), cfg.n_rx, n_pilots);
            corr.noalias() = rx_atoms.adjoint() * r;
            s.noalias() = corr * aod_conj;
            int best_i = -1;
            int best_g = -1;
            double best_score = 0.0;
            for (int g = 0; g < cfg.g_phi; ++g)
                for (int i = 0; i < cfg.g_theta; ++i)
                {
                    const double score = std::norm(s(i, g)) * inv_norm[g];
                    if (score > best_score)
                    {
                        best_score = score;
                        best_i = i;
                        best_g = g;
                    }
                }
            if (best_g < 0)
                break;
            CVector column(n_obs);
            for (int t = 0; t < n_pilots; ++t)
                column.segment(static_cast<Eigen::Index>(t) * cfg.n_rx, cfg.n_rx) =
                    rx_atoms.col(best_i) * aod.u(t, best_g);
            if (!refit.push(column, target))
                break;
            chosen.emplace_back(best_i, best_g);
            residual = refit.residual(target);
            energy = residual.squaredNorm();
        }

        for (int a = 0; a < refit.size(); ++a)
            result.h_hat[k].noalias() +=
                (rx_atoms.col(chosen[a].first) * refit.coefficients()[a]) * tx_atoms_h.row(chosen[a].second);
        result.support_size += refit.size();
    }
    result.online_ms = elapsed_ms(start);
    return result;
}

void LmmseConfig::validate(const SystemConfig &cfg) const
{
    if (source == CovarianceSource::sample && training_set_size < cfg.n_tx + cfg.n_rx)
        throw ConfigError("LmmseConfig: training_set_size must be >= n_tx + n_rx");
}

KronCovariance sample_kron_covariance(const SystemConfig &cfg, std::span<const MultipathSet> training)
{
    if (training.empty())
        throw ConfigError("sample_kron_covariance: empty training set");
    CMatrix r_tx = CMatrix::Zero(cfg.n_tx, cfg.n_tx);
    CMatrix r_rx = CMatrix::Zero(cfg.n_rx, cfg.n_rx);
    const int K = cfg.n_subcarriers;

    for (const auto &set : training)
    {
        const auto n_paths = static_cast<Eigen::Index>(set.size());
        CMatrix a_rx(cfg.n_rx, n_paths);
        CMatrix a_tx(cfg.n_tx, n_paths);
        for (Eigen::Index l = 0; l < n_paths; ++l)
        {
            a_rx.col(l) = steering_vector(cfg.n_rx, set.paths[l].aoa);
            a_tx.col(l) = steering_vector(cfg.n_tx, set.paths[l].aod);
        }
        // q(l,l') = alpha_l conj(alpha_l') (1/K) sum_k exp(-j 2 pi k df (tau_l - tau_l'))
        CMatrix q(n_paths, n_paths);
        for (Eigen::Index l = 0; l < n_paths; ++l)
            for (Eigen::Index m = 0; m < n_paths; ++m)
            {
                const double x = cfg.subcarrier_spacing * (set.paths[l].delay - set.paths[m].delay);
                cdouble acc = 0.0;
                for (int k = 0; k < K; ++k)
                    acc += std::polar(1.0, -2.0 * pi * k * x);
                q(l, m) = set.paths[l].gain * std::conj(set.paths[m].gain) * acc / static_cast<double>(K);
            }
        const CMatrix rx_inner = q.cwiseProduct(a_tx.adjoint() * a_tx);
        const CMatrix tx_inner = q.conjugate().cwiseProduct(a_rx.adjoint() * a_rx);
        r_rx.noalias() += a_rx * rx_inner * a_rx.adjoint();
        r_tx.noalias() += a_tx * tx_inner * a_tx.adjoint();
    }
    const double draws = static_cast<double>(training.size());
    r_rx /= draws;
    r_tx /= draws;
    const double energy = r_rx.trace().real();
    if (!(energy > 0.0))
        throw NumericError("sample_kron_covariance: training channels carry no energy");
    r_tx /= energy;
    // Symmetrize away rounding so the eigensolvers see exact Hermitian input.
    KronCovariance cov;
    cov.r_tx = 0.5 * (r_tx + r_tx.adjoint());
    cov.r_rx = 0.5 * (r_rx + r_rx.adjoint());
    return cov;
}

EstimateResult lmmse_kron(const SystemConfig &cfg, const RxObservations &y, const PilotMatrix &x,
                          const KronCovariance &cov)
{
    const auto start = clock_type::now();
    if (cov.r_tx.rows() != cfg.n_tx || cov.r_tx.cols() != cfg.n_tx || cov.r_rx.rows() != cfg.n_rx ||
        cov.r_rx.cols() != cfg.n_rx)
        throw ConfigError("lmmse_kron: covariance dimensions do not match the configuration");
    if (y.n_subcarriers() != cfg.n_subcarriers || y.pilot_length() != x.length())
        throw ConfigError("lmmse_kron: observation dimensions do not match the configuration");

    auto check_psd = [](const CMatrix &r, const char *name) {
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(r, Eigen::EigenvaluesOnly);
        const double hi = eig.eigenvalues().maxCoeff();
        const double lo = eig.eigenvalues().minCoeff();
        if (!(lo >= -1e-9 * std::max(hi, 1.0)))
            throw ConfigError(std::string("lmmse_kron: covariance ") + name + " is not positive semidefinite");
    };
    check_psd(cov.r_tx, "r_tx");
    check_psd(cov.r_rx, "r_rx");

    // A C_h A^H = B (x) r_rx with B = X^T r_tx^T X^*; both factors diagonalize jointly.
    const CMatrix b = x.x.transpose() * cov.r_tx.transpose() * x.x.conjugate();
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig_b(0.5 * (b + b.adjoint()));
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig_r(cov.r_rx);
    const CMatrix &ub = eig_b.eigenvectors();
    const CMatrix &ur = eig_r.eigenvectors();
    const Eigen::VectorXd &lb = eig_b.eigenvalues();
    const Eigen::VectorXd &lr = eig_r.eigenvalues();

    const double sigma2 = y.noise_variance;
    const double scale = std::max(lb.cwiseAbs().maxCoeff() * lr.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::MatrixXd inv_eig(lr.size(), lb.size());
    for (Eigen::Index r = 0; r < lr.size(); ++r)
        for (Eigen::Index t = 0; t < lb.size(); ++t)
        {
            const double d = lr[r] * lb[t] + sigma2;
            inv_eig(r, t) = d > 1e-12 * scale ? 1.0 / d : 0.0; // pseudo-inverse on the null space
        }

    const CMatrix ub_conj = ub.conjugate();
    const CMatrix ub_t = ub.transpose();
    const CMatrix right = x.x.adjoint() * cov.r_tx;

    EstimateResult result;
    result.h_hat.h.resize(cfg.n_subcarriers);
    CMatrix v;
    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        v.noalias() = ur.adjoint() * y.y[k] * ub_conj;
        v = v.cwiseProduct(inv_eig.cast<cdouble>());
        const CMatrix solved = ur * v * ub_t;
        result.h_hat[k].noalias() = cov.r_rx * solved * right;
    }
    result.online_ms = elapsed_ms(start);
    result.condition_number = std::numeric_limits<double>::quiet_NaN();
    return result;
}

} // namespace charm

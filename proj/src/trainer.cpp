#include "neurcross/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif
#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace neurcross {

namespace {

int thread_count()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

using Sums = std::array<double, 6>;

// Runs fn(begin, count, grad_buffer_or_null, sums) over fixed-size chunks.
// Chunks run in parallel waves; buffers and sums are reduced in chunk order,
// so results do not depend on the thread count.
template <class Fn>
Sums for_chunks(Eigen::Index n, Eigen::Index chunk, Eigen::VectorXd* grad, Fn&& fn)
{
    Sums total{};
    if (n <= 0)
        return total;
    const Eigen::Index chunks = (n + chunk - 1) / chunk;
    const Eigen::Index wave = std::max<Eigen::Index>(1, thread_count());
    std::vector<Eigen::VectorXd> bufs(static_cast<std::size_t>(std::min(wave, chunks)));
    std::vector<Sums> sums(bufs.size());
    for (Eigen::Index w0 = 0; w0 < chunks; w0 += wave) {
        const Eigen::Index nc = std::min(wave, chunks - w0);
#pragma omp parallel for schedule(static, 1)
        for (Eigen::Index c = 0; c < nc; ++c) {
            const Eigen::Index begin = (w0 + c) * chunk;
            const Eigen::Index count = std::min(chunk, n - begin);
            auto& buf = bufs[static_cast<std::size_t>(c)];
            if (grad)
                buf.setZero(grad->size());
            sums[static_cast<std::size_t>(c)] = Sums{};
            fn(begin, count, grad ? &buf : nullptr, sums[static_cast<std::size_t>(c)]);
        }
        for (Eigen::Index c = 0; c < nc; ++c) {
            if (grad)
                *grad += bufs[static_cast<std::size_t>(c)];
            for (int k = 0; k < 6; ++k)
                total[k] += sums[static_cast<std::size_t>(c)][k];
        }
    }
    return total;
}

// Large per-chunk temporaries are allocated and freed every iteration;
// keeping them on the heap instead of fresh mmap regions avoids repeated
// page faults.
void keep_allocations_on_heap()
{
    static std::once_flag once;
    std::call_once(once, [] {
#if defined(__GLIBC__)
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    });
}

enum Term { kE = 0, kDM, kDNM, kAN, kAP, kS };

void check_bbox(const TriMesh& mesh)
{
    for (const auto& v : mesh.vertices())
        if (v.cwiseAbs().maxCoeff() > 0.5 + 1e-9)
            throw Error("train: mesh is not normalized to [-0.5, 0.5]^3");
}

} // namespace

int configure_threads()
{
#ifdef _OPENMP
    if (const char* env = std::getenv("NEURCROSS_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1)
            throw Error(std::string("NEURCROSS_THREADS must be a positive integer, got '") + env + "'");
        omp_set_num_threads(static_cast<int>(n));
    }
#endif
    return thread_count();
}

TrainingProblem::TrainingProblem(const TriMesh& mesh, const TrainConfig& cfg, const FeatureLines* lines)
    : mesh_(mesh), cfg_(cfg)
{
    keep_allocations_on_heap();
    if (cfg.iterations < 1)
        throw Error("train: iterations must be >= 1");
    if (!(cfg.adam.lr > 0.0))
        throw Error("train: learning rate must be positive");
    if (cfg.sdf_chunk < 1 || cfg.angle_chunk < 1)
        throw Error("train: chunk sizes must be positive");
    if (mesh.face_count() < 2)
        throw Error("train: mesh needs at least two faces");
    P_ = build_P(mesh);
    sigma_ = kth_neighbor_distance(P_.points, cfg.knn);
    features_ = build_features(mesh);
    fc_ = feature_constraints(mesh, lines ? *lines : FeatureLines{}, cfg.weights.rho_feature);
}

Eigen::Matrix3Xd TrainingProblem::omega_samples(long iter) const
{
    return draw_offsets(P_.points, sigma_, mix_seed(mix_seed(cfg_.seed, 3), static_cast<std::uint64_t>(iter)));
}

Eigen::Matrix3Xd TrainingProblem::q_samples(long iter) const
{
    const Eigen::Index n = cfg_.q_count > 0 ? cfg_.q_count : P_.size();
    return build_Q(n, mix_seed(mix_seed(cfg_.seed, 4), static_cast<std::uint64_t>(iter)));
}

std::vector<double> TrainingProblem::field_theta(const AngleModel& angle) const
{
    auto theta = predict_theta(angle, features_, cfg_.angle_chunk);
    for (std::size_t f = 0; f < theta.size(); ++f)
        if (fc_.constrained[f])
            theta[f] = fc_.fixed_theta[f];
    return theta;
}

void TrainingProblem::cache_hessians(const SdfModel& sdf)
{
    const Eigen::Index n = P_.size();
    hessian_cache_.assign(static_cast<std::size_t>(n), Mat3::Zero());
    for_chunks(n, cfg_.sdf_chunk, nullptr, [&](Eigen::Index b, Eigen::Index m, Eigen::VectorXd*, Sums&) {
        JetTape tape;
        forward(sdf.net, P_.points.middleCols(b, m), JetOrder::Hessian, tape);
        for (Eigen::Index i = 0; i < m; ++i)
            hessian_cache_[static_cast<std::size_t>(b + i)] = bundle_at(tape, i).hessian;
    });
}

LossTerms TrainingProblem::evaluate(const SdfModel& sdf, const AngleModel& angle, long iter,
                                    const EvalOptions& opt) const
{
    const Eigen::Index NP = P_.size();
    const auto& w = cfg_.weights;
    const std::size_t F = static_cast<std::size_t>(NP);
    LossTerms terms;

    // ---- angle forward ----------------------------------------------------
    std::vector<double> theta;
    CrossField field;
    std::vector<double> theta_bar;
    std::vector<AngleTape> tapes;
    const Eigen::Index ac = cfg_.angle_chunk;
    const Eigen::Index angle_chunks = (NP + ac - 1) / ac;
    bool keep_tapes = false;
    if (opt.field_terms) {
        const double bytes = 8.0 * static_cast<double>(activation_rows_per_sample(angle)) * static_cast<double>(NP);
        keep_tapes = opt.angle_grad != nullptr && bytes <= cfg_.angle_cache_mb * 1024.0 * 1024.0;
        if (keep_tapes)
            tapes.resize(static_cast<std::size_t>(angle_chunks));
        theta.resize(F);
#pragma omp parallel for schedule(static, 1)
        for (Eigen::Index c = 0; c < angle_chunks; ++c) {
            const Eigen::Index b = c * ac;
            const Eigen::Index m = std::min(ac, NP - b);
            AngleTape local;
            AngleTape& tp = keep_tapes ? tapes[static_cast<std::size_t>(c)] : local;
            forward(angle, features_.middleCols(b, m), static_cast<std::size_t>(b), tp);
            for (Eigen::Index i = 0; i < m; ++i)
                theta[static_cast<std::size_t>(b + i)] = kTwoPi * tp.omega[i];
        }
        for (std::size_t f = 0; f < F; ++f)
            if (fc_.constrained[f])
                theta[f] = fc_.fixed_theta[f];
        field = make_cross_field(theta, P_.frames);
        theta_bar.assign(F, 0.0);
    }

    // ---- SDF on the surface samples ---------------------------------------
    const Eigen::Index NO = opt.sdf_terms ? NP : 0;
    const double cE = w.eikonal / static_cast<double>(NP + NO);
    const double cDM = w.dm / static_cast<double>(NP);
    const double cAN = opt.tau * w.an / static_cast<double>(NP);
    const double cAP = w.ap / static_cast<double>(NP);
    const bool use_cache = !opt.sdf_terms && !hessian_cache_.empty();
    Sums sums{};

    if (opt.field_terms && use_cache) {
        for (std::size_t p = 0; p < F; ++p) {
            Vec3 ab, bb;
            const double d = fc_.weight[p];
            sums[kAP] += d * ap_sample(hessian_cache_[p], field.alpha[p], field.beta[p], nullptr, &ab, &bb);
            theta_bar[p] = cAP * d * theta_adjoint(field.alpha[p], field.beta[p], ab, bb);
        }
    } else if (opt.sdf_terms || opt.field_terms) {
        Eigen::VectorXd* sg = opt.sdf_grad;
        const Sums s = for_chunks(NP, cfg_.sdf_chunk, sg, [&](Eigen::Index b, Eigen::Index m, Eigen::VectorXd* buf,
                                                             Sums& acc) {
            JetTape tape;
            forward(sdf.net, P_.points.middleCols(b, m), JetOrder::Hessian, tape);
            const auto& out = tape.output;
            Eigen::MatrixXd bar = Eigen::MatrixXd::Zero(1, 10 * m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const std::size_t p = static_cast<std::size_t>(b + i);
                const double f = out(0, i);
                const Vec3 g(out(0, m + i), out(0, 2 * m + i), out(0, 3 * m + i));
                double h[6];
                for (int k = 0; k < 6; ++k)
                    h[k] = out(0, (4 + k) * m + i);
                const Mat3 H = sym_to_mat(h);
                Mat3 Hbar = Mat3::Zero();
                if (opt.sdf_terms) {
                    double fb;
                    acc[kDM] += dm_sample(f, &fb);
                    bar(0, i) += cDM * fb;
                    Vec3 gb;
                    acc[kE] += eikonal_sample(g, &gb);
                    for (int k = 0; k < 3; ++k)
                        bar(0, (1 + k) * m + i) += cE * gb[k];
                    Mat3 Han;
                    acc[kAN] += an_sample(H, P_.normals.col(b + i), &Han);
                    Hbar += cAN * Han;
                }
                if (opt.field_terms) {
                    Mat3 Hap;
                    Vec3 ab, bb;
                    const double d = fc_.weight[p];
                    acc[kAP] += d * ap_sample(H, field.alpha[p], field.beta[p], &Hap, &ab, &bb);
                    Hbar += (cAP * d) * Hap;
                    theta_bar[p] = cAP * d * theta_adjoint(field.alpha[p], field.beta[p], ab, bb);
                }
                double hs[6];
                mat_grad_to_sym(Hbar, hs);
                for (int k = 0; k < 6; ++k)
                    bar(0, (4 + k) * m + i) = hs[k];
            }
            if (buf)
                backward(sdf.net, tape, bar, *buf);
        });
        for (int k = 0; k < 6; ++k)
            sums[k] += s[k];
    }

    // ---- near-surface and far-field samples -------------------------------
    if (opt.sdf_terms) {
        const Eigen::Matrix3Xd omega = omega_samples(iter);
        const Sums so = for_chunks(NO, cfg_.sdf_chunk, opt.sdf_grad, [&](Eigen::Index b, Eigen::Index m,
                                                                        Eigen::VectorXd* buf, Sums& acc) {
            JetTape tape;
            forward(sdf.net, omega.middleCols(b, m), JetOrder::Gradient, tape);
            const auto& out = tape.output;
            Eigen::MatrixXd bar = Eigen::MatrixXd::Zero(1, 4 * m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const Vec3 g(out(0, m + i), out(0, 2 * m + i), out(0, 3 * m + i));
                Vec3 gb;
                acc[kE] += eikonal_sample(g, &gb);
                for (int k = 0; k < 3; ++k)
                    bar(0, (1 + k) * m + i) = cE * gb[k];
            }
            if (buf)
                backward(sdf.net, tape, bar, *buf);
        });
        sums[kE] += so[kE];

        const Eigen::Matrix3Xd q = q_samples(iter);
        const double cDNM = w.dnm / static_cast<double>(q.cols());
        const Sums sq = for_chunks(q.cols(), 4 * cfg_.sdf_chunk, opt.sdf_grad,
                                   [&](Eigen::Index b, Eigen::Index m, Eigen::VectorXd* buf, Sums& acc) {
                                       JetTape tape;
                                       forward(sdf.net, q.middleCols(b, m), JetOrder::Value, tape);
                                       Eigen::MatrixXd bar(1, m);
                                       for (Eigen::Index i = 0; i < m; ++i) {
                                           double fb;
                                           acc[kDNM] += dnm_sample(tape.output(0, i), w.rho_dnm, &fb);
                                           bar(0, i) = cDNM * fb;
                                       }
                                       if (buf)
                                           backward(sdf.net, tape, bar, *buf);
                                   });
        terms.dnm = sq[kDNM] / static_cast<double>(q.cols());
        terms.eikonal = sums[kE] / static_cast<double>(NP + NO);
        terms.dm = sums[kDM] / static_cast<double>(NP);
        terms.an = sums[kAN] / static_cast<double>(NP);
    }

    // ---- field terms -------------------------------------------------------
    if (opt.field_terms) {
        terms.ap = sums[kAP] / static_cast<double>(NP);
        std::vector<double> sgrad;
        terms.s = loss_smoothness(field, mesh_, opt.angle_grad ? &sgrad : nullptr);
        if (opt.angle_grad) {
            for (std::size_t f = 0; f < F; ++f)
                theta_bar[f] = fc_.constrained[f] ? 0.0 : theta_bar[f] + w.s * sgrad[f];
            const Eigen::Map<const Eigen::RowVectorXd> tb(theta_bar.data(), NP);
            for_chunks(NP, ac, opt.angle_grad, [&](Eigen::Index b, Eigen::Index m, Eigen::VectorXd* buf, Sums&) {
                const std::size_t c = static_cast<std::size_t>(b / ac);
                if (keep_tapes) {
                    backward(angle, tapes[c], tb.segment(b, m), *buf);
                } else {
                    AngleTape tp;
                    forward(angle, features_.middleCols(b, m), static_cast<std::size_t>(b), tp);
                    backward(angle, tp, tb.segment(b, m), *buf);
                }
            });
        }
    }
    return terms;
}

std::string format_history_row(const HistoryRow& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.iter, r.terms.eikonal,
                  r.terms.dm, r.terms.dnm, r.terms.an, r.terms.ap, r.terms.s, r.total, r.tau);
    return buf;
}

TrainResult train(const TriMesh& mesh, const TrainConfig& cfg, const FeatureLines* lines,
                  const TrainCallbacks& callbacks)
{
    check_bbox(mesh);
    TrainingProblem problem(mesh, cfg, lines);
    const LossWeights& w = cfg.weights;

    TrainResult res;
    res.sdf = init_sdf(mix_seed(cfg.seed, 1), cfg.sdf);
    res.angle = init_angle_model(cfg.angle, mesh.face_count(), mix_seed(cfg.seed, 2));

    AdamState sdf_state, angle_state;
    sdf_state.resize(res.sdf.net.parameter_count());
    angle_state.resize(res.angle.parameter_count());
    long sdf_steps = 0, angle_steps = 0;

    const long phase1 = cfg.two_step
                            ? std::clamp(static_cast<long>(std::llround(cfg.two_step_fraction * cfg.iterations)), 1L,
                                         cfg.iterations)
                            : 0;

    const bool write_files = !cfg.output_dir.empty();
    std::ofstream history, timing;
    if (write_files) {
        std::filesystem::create_directories(cfg.output_dir / "checkpoints");
        history.open(cfg.output_dir / "history.csv", std::ios::trunc);
        timing.open(cfg.output_dir / "timing.csv", std::ios::trunc);
        if (!history || !timing)
            throw Error("cannot write history files under " + cfg.output_dir.string());
        history << kHistoryHeader << "\n";
        timing << "iter,ms\n";
    }

    auto snapshot = [&](long completed) {
        Checkpoint c;
        c.iteration = completed;
        c.sdf_arch = cfg.sdf;
        c.sdf = res.sdf;
        c.angle = res.angle;
        c.has_optimizer = true;
        c.sdf_steps = sdf_steps;
        c.angle_steps = angle_steps;
        c.sdf_state = sdf_state;
        c.angle_state = angle_state;
        return c;
    };

    LossTerms frozen{};  // SDF terms at the end of SDF-only pretraining
    Eigen::VectorXd g_sdf(res.sdf.net.parameter_count());
    Eigen::VectorXd g_angle(res.angle.parameter_count());

    for (long it = 0; it < cfg.iterations; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const bool sdf_phase = !cfg.two_step || it < phase1;
        const bool field_phase = !cfg.two_step || it >= phase1;

        if (cfg.two_step && it == phase1) {
            frozen = problem.evaluate(res.sdf, res.angle, it, {true, false, 0.0, nullptr, nullptr});
            problem.cache_hessians(res.sdf);
        }

        EvalOptions opt;
        opt.sdf_terms = sdf_phase;
        opt.field_terms = field_phase;
        opt.tau = sdf_phase ? (cfg.two_step ? tau(it, phase1) : tau(it, cfg.iterations)) : 0.0;
        g_sdf.setZero();
        g_angle.setZero();
        opt.sdf_grad = sdf_phase ? &g_sdf : nullptr;
        opt.angle_grad = field_phase ? &g_angle : nullptr;

        HistoryRow row;
        row.iter = it;
        row.tau = opt.tau;
        try {
            row.terms = problem.evaluate(res.sdf, res.angle, it, opt);
            if (!sdf_phase) {
                row.terms.eikonal = frozen.eikonal;
                row.terms.dm = frozen.dm;
                row.terms.dnm = frozen.dnm;
                row.terms.an = frozen.an;
            }
            check_finite(row.terms);
            row.total = total_loss(row.terms, w, row.tau);
            if (!std::isfinite(row.total))
                throw Error("non-finite total loss");
            if (!g_sdf.allFinite())
                throw Error("non-finite SDF gradient");
            if (!g_angle.allFinite())
                throw Error("non-finite angle-model gradient");
        } catch (const Error& e) {
            res.diverged = true;
            res.message = "diverged at iteration " + std::to_string(it) + ": " + e.what();
            break;
        }

        if (cfg.grad_clip > 0.0) {
            double n2 = 0.0;
            if (sdf_phase)
                n2 += g_sdf.squaredNorm();
            if (field_phase)
                n2 += g_angle.squaredNorm();
            const double norm = std::sqrt(n2);
            if (norm > cfg.grad_clip) {
                g_sdf *= cfg.grad_clip / norm;
                g_angle *= cfg.grad_clip / norm;
            }
        }
        if (sdf_phase)
            adam_step(res.sdf.net.parameters(), g_sdf, sdf_state, ++sdf_steps, cfg.adam);
        if (field_phase)
            adam_step(res.angle.parameters(), g_angle, angle_state, ++angle_steps, cfg.adam);
        res.completed = it + 1;

        row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const bool log_now = (cfg.log_every > 0 && it % cfg.log_every == 0) || it + 1 == cfg.iterations;
        if (log_now) {
            res.history.push_back(row);
            if (write_files) {
                history << format_history_row(row) << "\n";
                timing << it << "," << row.ms << "\n";
            }
            if (callbacks.on_log)
                callbacks.on_log(row);
            if (cfg.verbose)
                std::fprintf(stderr, "iter %6ld  total %.6g  E %.4g DM %.4g DNM %.4g AN %.4g AP %.4g S %.4g  (%.0f ms)\n",
                             it, row.total, row.terms.eikonal, row.terms.dm, row.terms.dnm, row.terms.an,
                             row.terms.ap, row.terms.s, row.ms);
        }
        if (write_files && cfg.checkpoint_every > 0 && res.completed % cfg.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "ckpt_%07ld.bin", res.completed);
            save_checkpoint(cfg.output_dir / "checkpoints" / name, snapshot(res.completed));
            history.flush();
            timing.flush();
        }
    }

    res.final_checkpoint = snapshot(res.completed);
    if (write_files) {
        history.flush();
        timing.flush();
        if (!res.diverged)
            save_checkpoint(cfg.output_dir / "final.bin", res.final_checkpoint);
    }
    return res;
}

} // namespace neurcross

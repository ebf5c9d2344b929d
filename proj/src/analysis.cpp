#include "nhsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "nhsim/error.hpp"

namespace nhsim::analysis {

namespace {

constexpr std::size_t kMinWindowSamples = 8;

// Linear interpolation of a complex mode at time t; t must lie inside the grid.
cplx interpolate(const Trajectory& tr, Mode m, double t) {
    const auto& ts = tr.times();
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return tr.amplitude(ts.size() - 1, m);
    const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    if (*it == t || hi == 0) return tr.amplitude(hi, m);
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return (1.0 - w) * tr.amplitude(lo, m) + w * tr.amplitude(hi, m);
}

// Union of both grids restricted to their overlap; near-equal times are merged.
std::vector<double> common_grid(const std::vector<double>& a, const std::vector<double>& b) {
    if (a == b) return a;
    if (a.empty() || b.empty()) {
        throw DiagnosticError("cannot compare empty trajectories");
    }
    const double lo = std::max(a.front(), b.front());
    const double hi = std::min(a.back(), b.back());
    if (!(hi >= lo)) {
        throw DiagnosticError("trajectories cover disjoint time ranges");
    }
    std::vector<double> merged;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
    std::vector<double> out;
    const double tol = 1e-9 * std::max(1.0, std::abs(hi));
    for (double t : merged) {
        if (t < lo - tol || t > hi + tol) continue;
        if (!out.empty() && t - out.back() <= tol) continue;
        out.push_back(std::clamp(t, lo, hi));
    }
    return out;
}

bool is_modulus(Field f) { return f == Field::AbsA1 || f == Field::AbsA2 || f == Field::Norm; }

struct TwoTone {
    cplx a, b;
    double residual2 = 0.0;
};

// Linear least squares for x ≈ a e^{iw1 t} + b e^{iw2 t}.
TwoTone fit_two_tone(std::span<const double> t, std::span<const cplx> x, double w1, double w2) {
    cplx uu = 0, uv = 0, vv = 0, ux = 0, vx = 0;
    std::vector<cplx> u(t.size()), v(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        u[j] = std::polar(1.0, w1 * t[j]);
        v[j] = std::polar(1.0, w2 * t[j]);
        uu += std::norm(u[j]);
        vv += std::norm(v[j]);
        uv += std::conj(u[j]) * v[j];
        ux += std::conj(u[j]) * x[j];
        vx += std::conj(v[j]) * x[j];
    }
    const cplx det = uu * vv - uv * std::conj(uv);
    TwoTone fit;
    if (std::abs(det) <= 1e-12 * std::abs(uu * vv)) {
        fit.a = ux / uu;
        fit.b = 0.0;
    } else {
        fit.a = (vv * ux - uv * vx) / det;
        fit.b = (uu * vx - std::conj(uv) * ux) / det;
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
        fit.residual2 += std::norm(x[j] - fit.a * u[j] - fit.b * v[j]);
    }
    return fit;
}

// Golden-section minimum of f on [lo, hi].
template <class F>
double golden_min(F f, double lo, double hi, int iterations) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iterations; ++i) {
        if (fc < fd) {
            hi = d; d = c; fd = fc;
            c = hi - r * (hi - lo); fc = f(c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + r * (hi - lo); fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

std::string fmt(double v) { return format_number(v); }

} // namespace

// ---------------------------------------------------------------------------

void PearsonConfig::validate() const {
    if (!(window > 0.0) || !std::isfinite(window)) {
        throw InvalidParameter("pearson window must be > 0");
    }
    if (stride < 0.0 || !std::isfinite(stride)) {
        throw InvalidParameter("pearson stride must be > 0 (or 0 for window/2)");
    }
}

std::vector<PearsonPoint> pearson_factor(std::span<const double> times, std::span<const double> f,
                                         std::span<const double> g, const PearsonConfig& cfg) {
    cfg.validate();
    if (f.size() != times.size() || g.size() != times.size()) {
        throw DiagnosticError("pearson inputs must share one time grid");
    }
    if (times.empty()) return {};
    const double stride = cfg.effective_stride();
    const double eps = 1e-9 * cfg.window;
    std::vector<PearsonPoint> out;
    std::size_t first = 0;
    for (std::size_t k = 0;; ++k) {
        const double start = times.front() + static_cast<double>(k) * stride;
        const double stop = start + cfg.window;
        if (stop > times.back() + eps) break;
        while (first < times.size() && times[first] < start - eps) ++first;
        std::size_t last = first;
        while (last < times.size() && times[last] < stop - eps) ++last;
        const std::size_t n = last - first;
        if (n < kMinWindowSamples) {
            throw DiagnosticError("pearson window of " + fmt(cfg.window) + " holds only " + std::to_string(n) +
                                  " samples (need >= 8)");
        }
        double mf = 0.0, mg = 0.0;
        for (std::size_t i = first; i < last; ++i) {
            mf += f[i];
            mg += g[i];
        }
        mf /= static_cast<double>(n);
        mg /= static_cast<double>(n);
        double sfg = 0.0, sff = 0.0, sgg = 0.0, qf = 0.0, qg = 0.0;
        for (std::size_t i = first; i < last; ++i) {
            const double df = f[i] - mf, dg = g[i] - mg;
            sfg += df * dg;
            sff += df * df;
            sgg += dg * dg;
            qf += f[i] * f[i];
            qg += g[i] * g[i];
        }
        PearsonPoint p{start, std::nullopt};
        // Variance at rounding level of the signal counts as zero.
        if (sff > 1e-26 * qf && sgg > 1e-26 * qg && sff > 0.0 && sgg > 0.0) {
            p.value = sfg / std::sqrt(sff * sgg);
        }
        out.push_back(p);
    }
    return out;
}

std::vector<PearsonPoint> pearson_factor(const Trajectory& traj, const PearsonConfig& cfg) {
    const auto f = traj.series(cfg.f);
    const auto g = traj.series(cfg.g);
    return pearson_factor(traj.times(), f, g, cfg);
}

// ---------------------------------------------------------------------------

std::optional<double> EliminationError::first_exceeding(double bound) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (error[0][i] >= bound || error[1][i] >= bound) return times[i];
    }
    return std::nullopt;
}

EliminationError elimination_error(const Trajectory& a, const Trajectory& b) {
    EliminationError e;
    e.times = common_grid(a.times(), b.times());
    const bool same = a.times() == b.times();
    const std::array<Mode, 2> modes{Mode::A1, Mode::A2};
    for (std::size_t j = 0; j < 2; ++j) {
        e.error[j].resize(e.times.size());
        for (std::size_t i = 0; i < e.times.size(); ++i) {
            const cplx x = same ? a.amplitude(i, modes[j]) : interpolate(a, modes[j], e.times[i]);
            const cplx y = same ? b.amplitude(i, modes[j]) : interpolate(b, modes[j], e.times[i]);
            const double d = std::abs(x - y);
            e.error[j][i] = d;
            if (d > e.max[j]) {
                e.max[j] = d;
                e.max_time[j] = e.times[i];
            }
        }
    }
    return e;
}

// ---------------------------------------------------------------------------

std::vector<Peak> envelope_peaks(std::span<const double> times, std::span<const double> x) {
    if (times.size() != x.size()) {
        throw DiagnosticError("envelope input sizes differ");
    }
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double y0 = std::abs(x[i - 1]), y1 = std::abs(x[i]), y2 = std::abs(x[i + 1]);
        if (!(y1 > y0 && y1 >= y2)) continue;
        const double curv = y0 - 2.0 * y1 + y2;
        Peak p{times[i], y1};
        if (curv < 0.0) {
            const double h = 0.5 * (times[i + 1] - times[i - 1]);
            const double off = 0.5 * (y0 - y2) / curv;
            p.t = times[i] + off * h;
            p.value = y1 - 0.25 * (y0 - y2) * off;
        }
        peaks.push_back(p);
    }
    return peaks;
}

GrowthFit fit_growth(std::span<const Peak> peaks) {
    std::vector<Peak> usable;
    for (const auto& p : peaks) {
        if (p.value > 0.0 && std::isfinite(p.value)) usable.push_back(p);
    }
    if (usable.size() < 3) {
        throw DiagnosticError("envelope has " + std::to_string(usable.size()) + " peaks (need >= 3)");
    }
    const double n = static_cast<double>(usable.size());
    double mt = 0.0, my = 0.0;
    for (const auto& p : usable) {
        mt += p.t;
        my += std::log(p.value);
    }
    mt /= n;
    my /= n;
    double stt = 0.0, sty = 0.0;
    for (const auto& p : usable) {
        stt += (p.t - mt) * (p.t - mt);
        sty += (p.t - mt) * (std::log(p.value) - my);
    }
    const double span = usable.back().t - usable.front().t;
    if (!(stt > 0.0) || !(span > 0.0)) {
        throw DiagnosticError("envelope peaks span no time");
    }
    GrowthFit fit;
    fit.rate = sty / stt;
    fit.intercept = my - fit.rate * mt;
    double rss = 0.0;
    for (const auto& p : usable) {
        const double r = std::log(p.value) - (fit.intercept + fit.rate * p.t);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n) / span;
    fit.peaks = usable.size();
    return fit;
}

GrowthFit envelope_growth_rate(const Trajectory& traj, Field field, const EnvelopeOptions& opt) {
    if (opt.fit_from_fraction < 0.0 || opt.fit_from_fraction >= 1.0) {
        throw InvalidParameter("fit_from_fraction must be in [0, 1)");
    }
    if (traj.size() < 3) {
        throw DiagnosticError("trajectory too short for an envelope");
    }
    const auto values = traj.series(field);
    const auto peaks = envelope_peaks(traj.times(), values);
    const double t0 = traj.times().front();
    const double from = t0 + opt.fit_from_fraction * (traj.times().back() - t0);
    std::vector<Peak> late;
    for (const auto& p : peaks) {
        if (p.t >= from) late.push_back(p);
    }
    return fit_growth(late);
}

EnvelopeDip envelope_dip(const Trajectory& traj, Field field) {
    const auto values = traj.series(field);
    if (values.empty()) {
        throw DiagnosticError("empty trajectory");
    }
    EnvelopeDip dip;
    dip.initial = std::abs(values.front());

    std::vector<Peak> env;
    if (is_modulus(field)) {
        for (std::size_t i = 0; i < values.size(); ++i) env.push_back({traj.times()[i], values[i]});
    } else {
        env = envelope_peaks(traj.times(), values);
        env.insert(env.begin(), Peak{traj.times().front(), dip.initial});
    }
    for (std::size_t k = 1; k + 1 < env.size(); ++k) {
        if (env[k].value < env[k - 1].value && env[k].value <= env[k + 1].value) {
            dip.time = env[k].t;
            dip.value = env[k].value;
            break;
        }
    }
    return dip;
}

// ---------------------------------------------------------------------------

BeatEstimate beat_frequency(std::span<const double> times, std::span<const cplx> signal) {
    const std::size_t n = times.size();
    if (n < 16 || signal.size() != n) {
        throw DiagnosticError("beat analysis needs at least 16 samples on one grid");
    }
    const double span = times.back() - times.front();
    const double h = span / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(times[i] - times[i - 1] - h) > 1e-6 * h) {
            throw DiagnosticError("beat analysis needs uniform sampling");
        }
    }

    std::size_t padded = 1;
    while (padded < 8 * n) padded <<= 1;
    fftw_complex* buf = fftw_alloc_complex(padded);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(padded), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    for (std::size_t j = 0; j < padded; ++j) {
        if (j < n) {
            const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                                   static_cast<double>(n - 1)));
            buf[j][0] = w * signal[j].real();
            buf[j][1] = w * signal[j].imag();
        } else {
            buf[j][0] = buf[j][1] = 0.0;
        }
    }
    fftw_execute(plan);
    std::vector<double> mag(padded);
    for (std::size_t k = 0; k < padded; ++k) mag[k] = std::hypot(buf[k][0], buf[k][1]);
    fftw_destroy_plan(plan);
    fftw_free(buf);

    auto omega_of = [&](std::size_t k) {
        const double kk = k < padded / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(padded);
        return 2.0 * std::numbers::pi * kk / (static_cast<double>(padded) * h);
    };

    std::vector<std::size_t> maxima;
    for (std::size_t k = 0; k < padded; ++k) {
        const double left = mag[(k + padded - 1) % padded], right = mag[(k + 1) % padded];
        if (mag[k] > left && mag[k] >= right) maxima.push_back(k);
    }
    if (maxima.size() < 2) {
        throw DiagnosticError("spectrum has a single line; beat unresolved");
    }
    std::partial_sort(maxima.begin(), maxima.begin() + 2, maxima.end(),
                      [&](std::size_t a, std::size_t b) { return mag[a] > mag[b] || (mag[a] == mag[b] && a < b); });

    double w1 = omega_of(maxima[0]), w2 = omega_of(maxima[1]);
    const double bin = 2.0 * std::numbers::pi / span;
    auto cost = [&](double a, double b) { return fit_two_tone(times, signal, a, b).residual2; };
    double width = bin;
    for (int round = 0; round < 8; ++round) {
        w1 = golden_min([&](double w) { return cost(w, w2); }, w1 - width, w1 + width, 40);
        w2 = golden_min([&](double w) { return cost(w1, w); }, w2 - width, w2 + width, 40);
        width *= 0.5;
    }
    const TwoTone fit = fit_two_tone(times, signal, w1, w2);

    double energy = 0.0;
    for (const auto& x : signal) energy += std::norm(x);
    BeatEstimate est;
    est.frequencies = {w1, w2};
    est.amplitudes = {std::abs(fit.a), std::abs(fit.b)};
    est.splitting = std::abs(w1 - w2);
    est.relative_residual = energy > 0.0 ? std::sqrt(fit.residual2 / energy) : 0.0;

    const double weak = std::min(est.amplitudes[0], est.amplitudes[1]);
    const double strong = std::max(est.amplitudes[0], est.amplitudes[1]);
    if (!(strong > 0.0) || weak < 1e-2 * strong) {
        throw DiagnosticError("second spectral line too weak; beat unresolved");
    }
    if (est.splitting < 0.5 * bin) {
        throw DiagnosticError("spectral lines closer than the frequency resolution; beat unresolved");
    }
    if (est.relative_residual > 0.1) {
        throw DiagnosticError("signal is not a two-line beat (relative residual " + fmt(est.relative_residual) + ")");
    }
    return est;
}

BeatEstimate beat_frequency(const Trajectory& traj, Mode mode) {
    const auto z = traj.amplitudes(mode);
    return beat_frequency(traj.times(), z);
}

// ---------------------------------------------------------------------------

Divergence trajectory_divergence(const Trajectory& reference, const Trajectory& other, double fraction) {
    if (!(fraction > 0.0)) {
        throw InvalidParameter("divergence fraction must be > 0");
    }
    Divergence d;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        d.scale = std::max(d.scale, std::abs(reference.amplitude(i, Mode::A1)));
    }
    const auto grid = common_grid(reference.times(), other.times());
    const bool same = reference.times() == other.times();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx x = same ? reference.amplitude(i, Mode::A1) : interpolate(reference, Mode::A1, grid[i]);
        const cplx y = same ? other.amplitude(i, Mode::A1) : interpolate(other, Mode::A1, grid[i]);
        const double dist = std::abs(x - y);
        d.max_distance = std::max(d.max_distance, dist);
        if (!d.time && dist > fraction * d.scale) d.time = grid[i];
    }
    return d;
}

// ---------------------------------------------------------------------------

std::string regime_name(Regime r) {
    switch (r) {
    case Regime::Amplifying: return "amplifying";
    case Regime::BoundedPeriodic: return "bounded-periodic";
    case Regime::Chaotic: return "chaotic";
    case Regime::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Classification classify(const ClassifyInput& in) {
    if (!in.growth && !in.lyapunov) {
        return {Regime::Inconclusive, "no growth fit and no Lyapunov estimate"};
    }
    const bool amplifying = in.growth && in.growth->significant();
    if (amplifying) {
        if (in.lyapunov && in.lyapunov->significance() < -3.0) {
            return {Regime::Inconclusive, "envelope grows but nearby trajectories contract (LLE < -3 sigma)"};
        }
        return {Regime::Amplifying, "growth rate " + fmt(in.growth->rate) + " exceeds 10x residual " +
                                        fmt(in.growth->residual)};
    }
    if (in.lyapunov && in.lyapunov->significance() > 3.0) {
        return {Regime::Chaotic, "bounded with LLE " + fmt(in.lyapunov->lle) + " > 3 sigma"};
    }
    return {Regime::BoundedPeriodic, "no significant growth and no positive LLE"};
}

std::string to_kv(const DiagnosticsReport& r) {
    std::ostringstream os;
    os << "classification=" << regime_name(r.classification.regime) << '\n';
    os << "classification.reason=" << r.classification.reason << '\n';
    if (r.growth) {
        os << "growth.rate=" << fmt(r.growth->rate) << '\n';
        os << "growth.residual=" << fmt(r.growth->residual) << '\n';
        os << "growth.peaks=" << r.growth->peaks << '\n';
    }
    if (r.lyapunov) {
        os << "lle=" << fmt(r.lyapunov->lle) << '\n';
        os << "lle.stderr=" << fmt(r.lyapunov->std_error) << '\n';
        os << "lle.segments=" << r.lyapunov->segments << '\n';
    }
    if (r.beat) {
        os << "beat.splitting=" << fmt(r.beat->splitting) << '\n';
        os << "beat.omega1=" << fmt(r.beat->frequencies[0]) << '\n';
        os << "beat.omega2=" << fmt(r.beat->frequencies[1]) << '\n';
        os << "beat.residual=" << fmt(r.beat->relative_residual) << '\n';
    }
    if (!r.pearson_series.empty()) {
        double lo = 2.0, hi = -2.0;
        std::size_t undefined = 0;
        for (const auto& p : r.pearson_series) {
            if (!p.value) {
                ++undefined;
                continue;
            }
            lo = std::min(lo, *p.value);
            hi = std::max(hi, *p.value);
        }
        os << "pearson.windows=" << r.pearson_series.size() << '\n';
        os << "pearson.undefined=" << undefined << '\n';
        if (undefined < r.pearson_series.size()) {
            os << "pearson.min=" << fmt(lo) << '\n';
            os << "pearson.max=" << fmt(hi) << '\n';
        }
    }
    for (std::size_t i = 0; i < r.notes.size(); ++i) {
        os << "note." << i << '=' << r.notes[i] << '\n';
    }
    return os.str();
}

std::string pearson_csv(const std::vector<PearsonPoint>& series) {
    std::ostringstream os;
    os << "t,C\n";
    for (const auto& p : series) {
        os << fmt(p.t) << ',' << (p.value ? fmt(*p.value) : std::string("nan")) << '\n';
    }
    return os.str();
}

std::string error_csv(const EliminationError& e) {
    std::ostringstream os;
    os << "t,err_a1,err_a2\n";
    for (std::size_t i = 0; i < e.times.size(); ++i) {
        os << fmt(e.times[i]) << ',' << fmt(e.error[0][i]) << ',' << fmt(e.error[1][i]) << '\n';
    }
    return os.str();
}

} // namespace nhsim::analysis

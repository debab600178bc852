#include "cmcflow/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace cmcflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

// One cached forward/backward plan pair per grid size. Evolution is
// sequential by contract, so no locking around the cache or FFTW planning.
class FftPlan {
public:
    explicit FftPlan(int n) : n_(n) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        forward_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buf_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    std::vector<cdouble> transform(const std::vector<cdouble>& in, bool forward) {
        load(in);
        fftw_execute(forward ? forward_ : backward_);
        return unload();
    }

private:
    void load(const std::vector<cdouble>& in) {
        for (int j = 0; j < n_; ++j) {
            buf_[j][0] = in[j].real();
            buf_[j][1] = in[j].imag();
        }
    }
    std::vector<cdouble> unload() const {
        std::vector<cdouble> out(n_);
        for (int j = 0; j < n_; ++j) out[j] = cdouble(buf_[j][0], buf_[j][1]);
        return out;
    }

    int n_;
    fftw_complex* buf_;
    fftw_plan forward_;
    fftw_plan backward_;
};

FftPlan& plan_for(int n) {
    static std::map<int, std::unique_ptr<FftPlan>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
    return *it->second;
}

std::vector<cdouble> fft(const std::vector<cdouble>& f) {
    return plan_for(static_cast<int>(f.size())).transform(f, true);
}

std::vector<cdouble> ifft(std::vector<cdouble> fhat) {
    const double inv_n = 1.0 / static_cast<double>(fhat.size());
    auto out = plan_for(static_cast<int>(fhat.size())).transform(fhat, false);
    for (auto& v : out) v *= inv_n;
    return out;
}

double wavenumber(int j, int n, double length) {
    const int k = j <= n / 2 ? j : j - n;
    return 2.0 * kPi * static_cast<double>(k) / length;
}

// Trapezoid rule over the full period: (L/N) sum.
cdouble periodic_integral(const std::vector<cdouble>& f, double length) {
    cdouble sum = 0.0;
    for (const auto& v : f) sum += v;
    return sum * (length / static_cast<double>(f.size()));
}

// Projection onto the retained Fourier band |mode| <= cutoff.
void band_limit(std::vector<cdouble>& component, int cutoff) {
    const int n = static_cast<int>(component.size());
    auto hat = fft(component);
    for (int j = 0; j < n; ++j) {
        const int mode = j <= n / 2 ? j : j - n;
        if (std::abs(mode) > cutoff) hat[j] = 0.0;
    }
    component = ifft(std::move(hat));
}

void band_limit(FieldState& state, int cutoff) {
    band_limit(state.psi1, cutoff);
    band_limit(state.psi2, cutoff);
}

// Galerkin right-hand side: spectral derivatives plus the cubic coupling, with
// the result projected back onto the retained band. Projecting the equation
// (rather than chopping the state after a step) keeps all four integrals exact
// invariants of the semi-discrete system.
void rhs(const FieldState& s, const ModelParams& params, int cutoff,
         std::vector<cdouble>& out1, std::vector<cdouble>& out2) {
    const auto d1 = spectral_derivative(s.psi1, s.length, 1);
    const auto d2 = spectral_derivative(s.psi2, s.length, 1);
    const int n = s.n();
    out1.resize(n);
    out2.resize(n);
    const cdouble i_unit(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        const double rho = std::norm(s.psi1[j]) + std::norm(s.psi2[j]);
        const double coupling = 2.0 * params.mean_curvature * rho;
        out1[j] = i_unit * d1[j] + coupling * s.psi2[j];
        out2[j] = -i_unit * d2[j] - coupling * s.psi1[j];
    }
    band_limit(out1, cutoff);
    band_limit(out2, cutoff);
}

// Composite Simpson prefix integral of the sampled integrand over the first
// `count` intervals of spacing h. Odd counts get a 3/8 tail; a single interval
// falls back to the quadratic end rule through the first three samples.
double prefix_integral(const std::vector<double>& f, double h, std::size_t count) {
    if (count == 0) return 0.0;
    if (count == 1) {
        if (f.size() >= 3) return h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
        return 0.5 * h * (f[0] + f[1]);
    }
    double total = 0.0;
    std::size_t simpson_end = count;
    if (count % 2 == 1) simpson_end = count - 3;
    for (std::size_t k = 0; k + 2 <= simpson_end; k += 2) {
        total += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    }
    if (count % 2 == 1) {
        const std::size_t k = simpson_end;
        total += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
    }
    return total;
}

struct LegIntegrands {
    // Coordinate one-form components along the two axis directions; w is the
    // complex pair whose mirrored real part and imaginary part give X1, X2.
    std::vector<double> w_re_t, w_im_t, w_re_x, w_im_x, z_t, z_x;
};

LegIntegrands leg_integrands(const FieldState& s) {
    const int n = s.n();
    LegIntegrands out;
    out.w_re_t.resize(n);
    out.w_im_t.resize(n);
    out.w_re_x.resize(n);
    out.w_im_x.resize(n);
    out.z_t.resize(n);
    out.z_x.resize(n);
    for (int j = 0; j < n; ++j) {
        const cdouble c1 = std::conj(s.psi1[j]);
        const cdouble c2 = std::conj(s.psi2[j]);
        const cdouble sq1 = c1 * c1;
        const cdouble sq2 = c2 * c2;
        const cdouble wt = cdouble(0.0, 2.0) * (sq1 - sq2);
        const cdouble wx = -2.0 * (sq1 + sq2);
        out.w_re_t[j] = wt.real();
        out.w_im_t[j] = wt.imag();
        out.w_re_x[j] = wx.real();
        out.w_im_x[j] = wx.imag();
        const cdouble cross = std::conj(s.psi1[j]) * s.psi2[j];
        out.z_t[j] = -4.0 * cross.real();
        out.z_x[j] = 4.0 * cross.imag();
    }
    return out;
}

void check_uniform_snapshots(const std::vector<FieldState>& fields, const char* where) {
    if (fields.size() < 2) throw std::domain_error(std::string(where) + ": need >= 2 snapshots");
    const int n = fields.front().n();
    const double dt = fields[1].time - fields[0].time;
    if (!(dt > 0.0)) throw std::domain_error(std::string(where) + ": snapshots not increasing in time");
    for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].n() != n || fields[i].length != fields.front().length) {
            throw std::domain_error(std::string(where) + ": inconsistent snapshot grids");
        }
        if (std::abs((fields[i].time - fields[i - 1].time) - dt) > 1e-9 * std::max(1.0, dt)) {
            throw std::domain_error(std::string(where) + ": non-uniform snapshot times");
        }
    }
}

}  // namespace

double FieldState::max_abs() const {
    double m = 0.0;
    for (const auto& v : psi1) m = std::max(m, std::abs(v));
    for (const auto& v : psi2) m = std::max(m, std::abs(v));
    return m;
}

void FieldState::validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw std::domain_error("FieldState: domain length must be positive");
    }
    if (psi1.size() != psi2.size()) {
        throw std::domain_error("FieldState: mismatched component grids");
    }
    const int grid = n();
    if (grid < 16 || grid % 2 != 0) {
        throw std::domain_error("FieldState: grid size must be even and >= 16");
    }
    for (int j = 0; j < grid; ++j) {
        if (!std::isfinite(psi1[j].real()) || !std::isfinite(psi1[j].imag()) ||
            !std::isfinite(psi2[j].real()) || !std::isfinite(psi2[j].imag())) {
            throw std::domain_error("FieldState: non-finite sample");
        }
    }
}

std::vector<cdouble> spectral_derivative(const std::vector<cdouble>& f, double length,
                                         int order) {
    if (order != 1 && order != 2) throw std::domain_error("spectral_derivative: order must be 1 or 2");
    const int n = static_cast<int>(f.size());
    auto fhat = fft(f);
    for (int j = 0; j < n; ++j) {
        const double k = wavenumber(j, n, length);
        if (order == 1) {
            const bool nyquist = (n % 2 == 0) && (j == n / 2);
            fhat[j] *= nyquist ? cdouble(0.0, 0.0) : cdouble(0.0, k);
        } else {
            fhat[j] *= -k * k;
        }
    }
    return ifft(std::move(fhat));
}

FieldState ansatz_field(const PhaseState& state, const ModelParams& params, double length,
                        int n, double time) {
    params.validate();
    const double mode = params.lambda * length / (2.0 * kPi);
    if (std::abs(mode - std::round(mode)) > 1e-12) {
        throw std::domain_error("ansatz_field: lambda L / (2 pi) must be an integer");
    }
    FieldState f;
    f.length = length;
    f.time = time;
    f.psi1.resize(n);
    f.psi2.resize(n);
    for (int j = 0; j < n; ++j) {
        const cdouble phase = std::exp(cdouble(0.0, params.lambda * f.x_at(j)));
        f.psi1[j] = state.r() * phase;
        f.psi2[j] = state.s() * phase;
    }
    f.validate();
    return f;
}

FieldState random_smooth_field(double length, int n, double amplitude, int max_mode,
                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    FieldState f;
    f.length = length;
    f.psi1.assign(n, 0.0);
    f.psi2.assign(n, 0.0);
    for (int m = -max_mode; m <= max_mode; ++m) {
        const cdouble c1(unit(rng), unit(rng));
        const cdouble c2(unit(rng), unit(rng));
        const double decay = amplitude / (1.0 + static_cast<double>(m * m));
        for (int j = 0; j < n; ++j) {
            const cdouble phase = std::exp(cdouble(0.0, 2.0 * kPi * m * f.x_at(j) / length));
            f.psi1[j] += decay * c1 * phase;
            f.psi2[j] += decay * c2 * phase;
        }
    }
    f.validate();
    return f;
}

std::vector<FieldState> evolve(const FieldState& state0, const ModelParams& params,
                               double dt, double t_end, int snapshot_stride,
                               int mode_cutoff) {
    params.validate();
    state0.validate();
    if (!(dt > 0.0)) throw std::domain_error("evolve: dt must be positive");
    if (snapshot_stride < 1) throw std::domain_error("evolve: snapshot stride must be positive");
    if (mode_cutoff < 1 || mode_cutoff > state0.n() / 2 - 1) {
        throw std::domain_error("evolve: mode cutoff must lie inside the resolved band");
    }
    const double guard = 0.5 * state0.length / static_cast<double>(state0.n());
    if (dt > guard) {
        throw std::domain_error("evolve: dt exceeds the stability guard 0.5 L / N");
    }
    const double initial_max = state0.max_abs();
    const double blowup_gate = initial_max * 1e6;  // never trips for zero data

    const long long n_steps = std::max(1LL, std::llround((t_end - state0.time) / dt));
    const double h = (t_end - state0.time) / static_cast<double>(n_steps);

    FieldState current = state0;
    band_limit(current, mode_cutoff);

    std::vector<FieldState> snapshots;
    snapshots.push_back(current);
    const int n = current.n();
    std::vector<cdouble> k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    FieldState stage = current;

    for (long long step = 1; step <= n_steps; ++step) {
        rhs(current, params, mode_cutoff, k1a, k1b);
        stage.time = current.time + 0.5 * h;
        for (int j = 0; j < n; ++j) {
            stage.psi1[j] = current.psi1[j] + 0.5 * h * k1a[j];
            stage.psi2[j] = current.psi2[j] + 0.5 * h * k1b[j];
        }
        rhs(stage, params, mode_cutoff, k2a, k2b);
        for (int j = 0; j < n; ++j) {
            stage.psi1[j] = current.psi1[j] + 0.5 * h * k2a[j];
            stage.psi2[j] = current.psi2[j] + 0.5 * h * k2b[j];
        }
        rhs(stage, params, mode_cutoff, k3a, k3b);
        stage.time = current.time + h;
        for (int j = 0; j < n; ++j) {
            stage.psi1[j] = current.psi1[j] + h * k3a[j];
            stage.psi2[j] = current.psi2[j] + h * k3b[j];
        }
        rhs(stage, params, mode_cutoff, k4a, k4b);
        for (int j = 0; j < n; ++j) {
            current.psi1[j] += h / 6.0 * (k1a[j] + 2.0 * k2a[j] + 2.0 * k3a[j] + k4a[j]);
            current.psi2[j] += h / 6.0 * (k1b[j] + 2.0 * k2b[j] + 2.0 * k3b[j] + k4b[j]);
        }
        current.time += h;

        const double magnitude = current.max_abs();
        if (initial_max > 0.0 && magnitude > blowup_gate) {
            throw FieldBlowupError("evolve: field magnitude exceeded the blow-up guard",
                                   current.time, magnitude);
        }
        if (step % snapshot_stride == 0 || step == n_steps) snapshots.push_back(current);
    }
    return snapshots;
}

ConservedSet conserved_quantities(const FieldState& state, const ModelParams& params) {
    params.validate();
    state.validate();
    const int n = state.n();
    const auto d1 = spectral_derivative(state.psi1, state.length, 1);
    const auto d2 = spectral_derivative(state.psi2, state.length, 1);

    std::vector<cdouble> f_plus(n), f_minus(n), f_p(n), f_h(n);
    for (int j = 0; j < n; ++j) {
        const cdouble s1 = state.psi1[j];
        const cdouble s2 = state.psi2[j];
        const cdouble sq = s1 * s1 + s2 * s2;
        const cdouble sq_bar = std::conj(s1) * std::conj(s1) + std::conj(s2) * std::conj(s2);
        f_plus[j] = sq + sq_bar;
        f_minus[j] = (sq - sq_bar) / cdouble(0.0, 1.0);
        f_p[j] = d1[j] * std::conj(s2) - std::conj(s1) * d2[j];
        const double rho = std::norm(s1) + std::norm(s2);
        f_h[j] = cdouble(0.0, 0.5) * (d1[j] * std::conj(s2) + std::conj(s1) * d2[j]) +
                 0.5 * params.mean_curvature * rho * rho;
    }

    ConservedSet out;
    out.c_plus = periodic_integral(f_plus, state.length);
    out.c_minus = periodic_integral(f_minus, state.length);
    out.p_momentum = periodic_integral(f_p, state.length);
    out.h_energy = periodic_integral(f_h, state.length);
    out.reality_defect = std::max({std::abs(out.c_plus.imag()), std::abs(out.c_minus.imag()),
                                   std::abs(out.p_momentum.imag()), std::abs(out.h_energy.imag())});
    return out;
}

double mode_concentration(const FieldState& state, const ModelParams& params) {
    state.validate();
    const int n = state.n();
    const double mode = params.lambda * state.length / (2.0 * kPi);
    if (std::abs(mode - std::round(mode)) > 1e-12) {
        throw std::domain_error("mode_concentration: lambda does not fit the torus");
    }
    int index = static_cast<int>(std::llround(mode));
    index = ((index % n) + n) % n;
    const auto h1 = fft(state.psi1);
    const auto h2 = fft(state.psi2);
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += std::norm(h1[j]) + std::norm(h2[j]);
    if (total == 0.0) return 1.0;
    return (std::norm(h1[index]) + std::norm(h2[index])) / total;
}

ImmersionMesh induce_generic(const std::vector<FieldState>& fields,
                             const ModelParams& params, PathOrder path) {
    params.validate();
    check_uniform_snapshots(fields, "induce_generic");
    const std::size_t nt = fields.size();
    const std::size_t nx = static_cast<std::size_t>(fields.front().n());
    const double ht = fields[1].time - fields[0].time;
    const double hx = fields.front().length / static_cast<double>(nx);

    std::vector<LegIntegrands> legs(nt);
    for (std::size_t i = 0; i < nt; ++i) legs[i] = leg_integrands(fields[i]);

    ImmersionMesh mesh;
    mesh.t_values.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) mesh.t_values[i] = fields[i].time;
    mesh.x_values.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) mesh.x_values[j] = fields.front().x_at(static_cast<int>(j));

    // Time-leg integrand series at a fixed column, per coordinate.
    auto t_series = [&](std::size_t column) {
        std::array<std::vector<double>, 3> series;
        for (auto& s : series) s.resize(nt);
        for (std::size_t i = 0; i < nt; ++i) {
            series[0][i] = legs[i].w_re_t[column];
            series[1][i] = legs[i].w_im_t[column];
            series[2][i] = legs[i].z_t[column];
        }
        return series;
    };

    mesh.points.resize(nt * nx);
    mesh.conformal_factor.resize(nt * nx);

    if (path == PathOrder::TimeThenSpace) {
        const auto base = t_series(0);
        for (std::size_t i = 0; i < nt; ++i) {
            const double w_re0 = prefix_integral(base[0], ht, i);
            const double w_im0 = prefix_integral(base[1], ht, i);
            const double z0 = prefix_integral(base[2], ht, i);
            for (std::size_t j = 0; j < nx; ++j) {
                const double w_re = w_re0 + prefix_integral(legs[i].w_re_x, hx, j);
                const double w_im = w_im0 + prefix_integral(legs[i].w_im_x, hx, j);
                const double z = z0 + prefix_integral(legs[i].z_x, hx, j);
                mesh.points[mesh.vertex_index(i, j)] = {-w_re, w_im, z};
            }
        }
    } else {
        for (std::size_t j = 0; j < nx; ++j) {
            const double w_re0 = prefix_integral(legs[0].w_re_x, hx, j);
            const double w_im0 = prefix_integral(legs[0].w_im_x, hx, j);
            const double z0 = prefix_integral(legs[0].z_x, hx, j);
            const auto series = t_series(j);
            for (std::size_t i = 0; i < nt; ++i) {
                const double w_re = w_re0 + prefix_integral(series[0], ht, i);
                const double w_im = w_im0 + prefix_integral(series[1], ht, i);
                const double z = z0 + prefix_integral(series[2], ht, i);
                mesh.points[mesh.vertex_index(i, j)] = {-w_re, w_im, z};
            }
        }
    }

    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            const double rho = std::norm(fields[i].psi1[j]) + std::norm(fields[i].psi2[j]);
            mesh.conformal_factor[mesh.vertex_index(i, j)] = 4.0 * rho * rho;
        }
    }

    // Gauss curvature from the conformal factor: K = -(1/4)(d_tt + d_xx) log rho
    // / rho^2, 4th-order differences in t and spectral in x. Edge rows
    // replicate the nearest interior row.
    mesh.gauss_curvature.assign(nt * nx, 0.0);
    if (nt >= 5) {
        std::vector<std::vector<double>> log_rho(nt, std::vector<double>(nx));
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                const double rho = std::norm(fields[i].psi1[j]) + std::norm(fields[i].psi2[j]);
                log_rho[i][j] = std::log(std::max(rho, 1e-300));
            }
        }
        for (std::size_t i = 2; i + 2 < nt; ++i) {
            std::vector<cdouble> row(nx);
            for (std::size_t j = 0; j < nx; ++j) row[j] = log_rho[i][j];
            const auto d_xx = spectral_derivative(row, fields.front().length, 2);
            for (std::size_t j = 0; j < nx; ++j) {
                const double d_tt = (-log_rho[i - 2][j] + 16.0 * log_rho[i - 1][j] -
                                     30.0 * log_rho[i][j] + 16.0 * log_rho[i + 1][j] -
                                     log_rho[i + 2][j]) /
                                    (12.0 * ht * ht);
                const double rho = std::norm(fields[i].psi1[j]) + std::norm(fields[i].psi2[j]);
                mesh.gauss_curvature[mesh.vertex_index(i, j)] =
                    -0.25 * (d_tt + d_xx[j].real()) / (rho * rho);
            }
        }
        for (std::size_t j = 0; j < nx; ++j) {
            mesh.gauss_curvature[mesh.vertex_index(0, j)] = mesh.gauss_curvature[mesh.vertex_index(2, j)];
            mesh.gauss_curvature[mesh.vertex_index(1, j)] = mesh.gauss_curvature[mesh.vertex_index(2, j)];
            mesh.gauss_curvature[mesh.vertex_index(nt - 1, j)] =
                mesh.gauss_curvature[mesh.vertex_index(nt - 3, j)];
            mesh.gauss_curvature[mesh.vertex_index(nt - 2, j)] =
                mesh.gauss_curvature[mesh.vertex_index(nt - 3, j)];
        }
    }

    mesh.faces.reserve((nt - 1) * (nx - 1));
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        for (std::size_t j = 0; j + 1 < nx; ++j) {
            mesh.faces.push_back({static_cast<int>(mesh.vertex_index(i, j)),
                                  static_cast<int>(mesh.vertex_index(i + 1, j)),
                                  static_cast<int>(mesh.vertex_index(i + 1, j + 1)),
                                  static_cast<int>(mesh.vertex_index(i, j + 1))});
        }
    }
    return mesh;
}

double dirac_residual(const std::vector<FieldState>& fields, const ModelParams& params) {
    params.validate();
    if (fields.size() < 5) throw std::out_of_range("dirac_residual: need >= 5 snapshots");
    check_uniform_snapshots(fields, "dirac_residual");
    const std::size_t nt = fields.size();
    const int nx = fields.front().n();
    const double ht = fields[1].time - fields[0].time;

    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < nt; ++i) {
        const auto d1x = spectral_derivative(fields[i].psi1, fields[i].length, 1);
        const auto d2x = spectral_derivative(fields[i].psi2, fields[i].length, 1);
        for (int j = 0; j < nx; ++j) {
            const cdouble d1t = (fields[i - 2].psi1[j] - 8.0 * fields[i - 1].psi1[j] +
                                 8.0 * fields[i + 1].psi1[j] - fields[i + 2].psi1[j]) /
                                (12.0 * ht);
            const cdouble d2t = (fields[i - 2].psi2[j] - 8.0 * fields[i - 1].psi2[j] +
                                 8.0 * fields[i + 1].psi2[j] - fields[i + 2].psi2[j]) /
                                (12.0 * ht);
            const cdouble dz1 = 0.5 * (d1t - cdouble(0.0, 1.0) * d1x[j]);
            const cdouble dzbar2 = 0.5 * (d2t + cdouble(0.0, 1.0) * d2x[j]);
            const double rho = std::norm(fields[i].psi1[j]) + std::norm(fields[i].psi2[j]);
            const double p = params.mean_curvature * rho;
            const double res = std::abs(dz1 - p * fields[i].psi2[j]) +
                               std::abs(dzbar2 + p * fields[i].psi1[j]);
            worst = std::max(worst, res);
        }
    }
    return worst;
}

}  // namespace cmcflow

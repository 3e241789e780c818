#include "bifluid_lab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>

namespace bifluidlab::spectral {
namespace {

constexpr double kTwoPi = TorusGrid::axis_length;

bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// --- FFTW plan cache ----------------------------------------------------
// Plans are created once per (dim, n) on scratch buffers and executed with
// the new-array interface on fftw_malloc'd call buffers, which keeps
// execution thread-safe.  Creation is serialized by a mutex.

struct PlanSet {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* real_scratch = nullptr;
    fftw_complex* cplx_scratch = nullptr;
    size_t npoints = 0, nspec = 0;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

const PlanSet& plans_for(int dim, int n) {
    static std::map<std::pair<int, int>, PlanSet> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find({dim, n});
    if (it != cache.end()) return it->second;
    PlanSet p;
    size_t npts = 1;
    for (int a = 0; a < dim; ++a) npts *= static_cast<size_t>(n);
    p.npoints = npts;
    p.nspec = npts / n * (n / 2 + 1);
    p.real_scratch = fftw_alloc_real(p.npoints);
    p.cplx_scratch = fftw_alloc_complex(p.nspec);
    std::vector<int> dims(dim, n);
    p.fwd = fftw_plan_dft_r2c(dim, dims.data(), p.real_scratch, p.cplx_scratch,
                              FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_c2r(dim, dims.data(), p.cplx_scratch, p.real_scratch,
                              FFTW_ESTIMATE);
    if (!p.fwd || !p.bwd) throw NumericError("fftw plan creation failed");
    return cache.emplace(std::make_pair(dim, n), p).first->second;
}

}  // namespace

// decompose a flat spectral index into wavenumbers (k[last] >= 0)
void wavevector(const TorusGrid& g, size_t flat, int k[3]) {
    const int n = g.n, nc = n / 2 + 1;
    k[0] = k[1] = k[2] = 0;
    if (g.dim == 1) {
        k[0] = static_cast<int>(flat);
    } else if (g.dim == 2) {
        int i0 = static_cast<int>(flat / nc), i1 = static_cast<int>(flat % nc);
        k[0] = i0 <= n / 2 ? i0 : i0 - n;
        k[1] = i1;
    } else {
        int i2 = static_cast<int>(flat % nc);
        int rest = static_cast<int>(flat / nc);
        int i1 = rest % n, i0 = rest / n;
        k[0] = i0 <= n / 2 ? i0 : i0 - n;
        k[1] = i1 <= n / 2 ? i1 : i1 - n;
        k[2] = i2;
    }
}

// flat spectral index of a wavevector with k[last] >= 0
size_t storage_index(const TorusGrid& g, const int k[3]) {
    const int n = g.n, nc = n / 2 + 1;
    auto wrap = [n](int v) { return v >= 0 ? v : v + n; };
    if (g.dim == 1) return static_cast<size_t>(k[0]);
    if (g.dim == 2) return static_cast<size_t>(wrap(k[0])) * nc + k[1];
    return (static_cast<size_t>(wrap(k[0])) * n + wrap(k[1])) * nc + k[2];
}

bool carries_nyquist(const TorusGrid& g, const int k[3]) {
    for (int a = 0; a < g.dim; ++a)
        if (std::abs(k[a]) == g.n / 2) return true;
    return false;
}

namespace {

// canonical representative of a +-k pair inside the stored half-lattice
inline bool is_canonical(const TorusGrid& g, const int k[3]) {
    const int last = g.dim - 1;
    if (k[last] > 0) return true;
    for (int a = 0; a < last; ++a) {
        if (k[a] > 0) return true;
        if (k[a] < 0) return false;
    }
    return true;  // the zero vector
}

// After writing canonical entries in the k_last = 0 plane, mirror them onto
// their in-plane conjugates so c2r sees a Hermitian array.
void enforce_plane_conjugates(Spectrum& s) {
    const TorusGrid& g = s.grid;
    if (g.dim == 1) return;
    int k[3];
    for (size_t i = 0; i < s.data.size(); ++i) {
        wavevector(g, i, k);
        if (k[g.dim - 1] != 0) continue;
        if (is_canonical(g, k)) continue;
        int mk[3] = {-k[0], -k[1], -k[2]};
        mk[g.dim - 1] = 0;
        s.data[i] = std::conj(s.data[storage_index(g, mk)]);
    }
}

void check_compatible(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw DomainError("fields live on different grids");
}

void check_finite(const Field& f, const char* op) {
    for (double v : f.data)
        if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite field entry");
}

}  // namespace

void TorusGrid::validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("TorusGrid: dimension must be 1, 2 or 3");
    if (!power_of_two(n) || n < 4)
        throw ConfigError("TorusGrid: points_per_axis must be a power of two >= 4");
}

size_t TorusGrid::points() const {
    size_t p = 1;
    for (int a = 0; a < dim; ++a) p *= static_cast<size_t>(n);
    return p;
}

size_t TorusGrid::spec_points() const { return points() / n * (n / 2 + 1); }

double TorusGrid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= axis_length / n;
    return v;
}

double TorusGrid::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= axis_length;
    return v;
}

Spectrum forward(const Field& f) {
    const auto& p = plans_for(f.grid.dim, f.grid.n);
    double* in = fftw_alloc_real(p.npoints);
    fftw_complex* out = fftw_alloc_complex(p.nspec);
    std::memcpy(in, f.data.data(), sizeof(double) * p.npoints);
    fftw_execute_dft_r2c(p.fwd, in, out);
    Spectrum s(f.grid);
    const double scale = 1.0 / static_cast<double>(p.npoints);
    for (size_t i = 0; i < p.nspec; ++i)
        s.data[i] = std::complex<double>(out[i][0], out[i][1]) * scale;
    fftw_free(in);
    fftw_free(out);
    return s;
}

Field inverse(const Spectrum& s) {
    const auto& p = plans_for(s.grid.dim, s.grid.n);
    fftw_complex* in = fftw_alloc_complex(p.nspec);
    double* out = fftw_alloc_real(p.npoints);
    for (size_t i = 0; i < p.nspec; ++i) {
        in[i][0] = s.data[i].real();
        in[i][1] = s.data[i].imag();
    }
    fftw_execute_dft_c2r(p.bwd, in, out);
    Field f(s.grid);
    std::memcpy(f.data.data(), out, sizeof(double) * p.npoints);
    fftw_free(in);
    fftw_free(out);
    return f;
}

const std::vector<Mode>& mode_table(const TorusGrid& grid) {
    static std::map<std::pair<int, int>, std::vector<Mode>> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find({grid.dim, grid.n});
    if (it != cache.end()) return it->second;

    std::vector<Mode> table;
    int k[3];
    for (size_t i = 0; i < grid.spec_points(); ++i) {
        wavevector(grid, i, k);
        if (carries_nyquist(grid, k)) continue;
        if (!is_canonical(grid, k)) continue;
        const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
        if (k2 == 0.0) {
            table.push_back({{0, 0, 0}, Mode::Constant, 0.0});
        } else {
            table.push_back({{k[0], k[1], k[2]}, Mode::Cosine, k2});
            table.push_back({{k[0], k[1], k[2]}, Mode::Sine, k2});
        }
    }
    std::sort(table.begin(), table.end(), [](const Mode& a, const Mode& b) {
        if (a.k2 != b.k2) return a.k2 < b.k2;
        if (a.k != b.k) return a.k < b.k;
        return a.kind < b.kind;
    });
    return cache.emplace(std::make_pair(grid.dim, grid.n), std::move(table)).first->second;
}

namespace {

// apply a per-entry complex multiplier derived from the wavevector
template <typename F>
Spectrum apply_symbol(const Spectrum& s, F&& mult) {
    Spectrum out(s.grid);
    int k[3];
    for (size_t i = 0; i < s.data.size(); ++i) {
        wavevector(s.grid, i, k);
        if (carries_nyquist(s.grid, k)) continue;  // derivative ops drop Nyquist
        out.data[i] = mult(k) * s.data[i];
    }
    return out;
}

}  // namespace

VectorField gradient(const Field& f) {
    check_finite(f, "gradient");
    Spectrum s = forward(f);
    VectorField g(f.grid);
    for (int a = 0; a < f.grid.dim; ++a) {
        Spectrum da = apply_symbol(s, [a](const int k[3]) {
            return std::complex<double>(0.0, k[a]);
        });
        g.comp[a] = inverse(da);
    }
    return g;
}

Field divergence(const VectorField& v) {
    Spectrum acc(v.grid);
    for (int a = 0; a < v.grid.dim; ++a) {
        check_finite(v.comp[a], "divergence");
        Spectrum s = forward(v.comp[a]);
        Spectrum da = apply_symbol(s, [a](const int k[3]) {
            return std::complex<double>(0.0, k[a]);
        });
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += da.data[i];
    }
    return inverse(acc);
}

Field laplacian(const Field& f) {
    Spectrum s = forward(f);
    Spectrum d = apply_symbol(s, [](const int k[3]) {
        const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
        return std::complex<double>(-k2, 0.0);
    });
    return inverse(d);
}

Field laplacian_inverse(const Field& f) {
    check_finite(f, "laplacian_inverse");
    Spectrum s = forward(f);
    Spectrum d = apply_symbol(s, [](const int k[3]) {
        const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
        return k2 == 0.0 ? std::complex<double>(0.0, 0.0)
                         : std::complex<double>(-1.0 / k2, 0.0);
    });
    return inverse(d);
}

VectorField inv_div(const Field& f) {
    check_finite(f, "inv_div");
    Spectrum s = forward(f);
    VectorField g(f.grid);
    for (int a = 0; a < f.grid.dim; ++a) {
        Spectrum da = apply_symbol(s, [a](const int k[3]) {
            const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
            return k2 == 0.0 ? std::complex<double>(0.0, 0.0)
                             : std::complex<double>(0.0, -k[a] / k2);
        });
        g.comp[a] = inverse(da);
    }
    return g;
}

VectorField riesz(const VectorField& v) {
    const int d = v.grid.dim;
    std::vector<Spectrum> s;
    for (int a = 0; a < d; ++a) {
        check_finite(v.comp[a], "riesz");
        s.push_back(forward(v.comp[a]));
    }
    VectorField out(v.grid);
    for (int i = 0; i < d; ++i) {
        Spectrum acc(v.grid);
        int k[3];
        for (size_t e = 0; e < acc.data.size(); ++e) {
            wavevector(v.grid, e, k);
            if (carries_nyquist(v.grid, k)) continue;
            const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
            if (k2 == 0.0) continue;  // mean mode maps to zero
            std::complex<double> dot(0.0, 0.0);
            for (int j = 0; j < d; ++j) dot += double(k[j]) * s[j].data[e];
            acc.data[e] = dot * (double(k[i]) / k2);
        }
        out.comp[i] = inverse(acc);
    }
    return out;
}

Field project_modes(const Field& f, int N) {
    const auto& table = mode_table(f.grid);
    if (N < 0 || static_cast<size_t>(N) > table.size())
        throw DomainError("project_modes: N out of range");
    Spectrum s = forward(f);
    Spectrum out(f.grid);
    for (int m = 0; m < N; ++m) {
        const Mode& mode = table[m];
        const size_t idx = storage_index(f.grid, mode.k.data());
        if (mode.kind == Mode::Constant) {
            out.data[idx].real(s.data[idx].real());
        } else if (mode.kind == Mode::Cosine) {
            out.data[idx].real(s.data[idx].real());
        } else {
            out.data[idx].imag(s.data[idx].imag());
        }
    }
    enforce_plane_conjugates(out);
    return inverse(out);
}

Field dealiased_product(const Field& a, const Field& b) {
    check_compatible(a, b);
    const TorusGrid& g = a.grid;
    const int n = g.n;
    const int m = 3 * n / 2;
    TorusGrid padded{g.dim, m};  // internal grid, not required to be a power of two

    Spectrum sa = forward(a), sb = forward(b);
    Spectrum pa(padded), pb(padded);
    int k[3];
    for (size_t i = 0; i < sa.data.size(); ++i) {
        wavevector(g, i, k);
        if (carries_nyquist(g, k)) continue;  // Nyquist has no signed counterpart
        const size_t j = storage_index(padded, k);
        pa.data[j] = sa.data[i];
        pb.data[j] = sb.data[i];
    }
    Field fa = inverse(pa), fb = inverse(pb);
    for (size_t i = 0; i < fa.data.size(); ++i) fa.data[i] *= fb.data[i];
    Spectrum pc = forward(fa);
    Spectrum sc(g);
    for (size_t i = 0; i < sc.data.size(); ++i) {
        wavevector(g, i, k);
        if (carries_nyquist(g, k)) continue;
        sc.data[i] = pc.data[storage_index(padded, k)];
    }
    return inverse(sc);
}

Field translate(const Field& f, const std::array<int, 3>& cells) {
    const TorusGrid& g = f.grid;
    const int n = g.n;
    Field out(g);
    auto wrap = [n](int v) { return ((v % n) + n) % n; };
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) out.data[i] = f.data[wrap(i - cells[0])];
    } else if (g.dim == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.data[size_t(i) * n + j] =
                    f.data[size_t(wrap(i - cells[0])) * n + wrap(j - cells[1])];
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l)
                    out.data[(size_t(i) * n + j) * n + l] =
                        f.data[(size_t(wrap(i - cells[0])) * n + wrap(j - cells[1])) * n +
                               wrap(l - cells[2])];
    }
    return out;
}

double mean(const Field& f) {
    double s = 0.0;
    for (double v : f.data) s += v;
    return s / static_cast<double>(f.data.size());
}

double integral(const Field& f) { return mean(f) * f.grid.volume(); }

double inner(const Field& a, const Field& b) {
    check_compatible(a, b);
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s * a.grid.cell_volume();
}

double l2_norm(const Field& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double linf_norm(const Field& f) {
    double m = 0.0;
    for (double v : f.data) m = std::max(m, std::abs(v));
    return m;
}

double spectral_l2(const Spectrum& s) {
    const TorusGrid& g = s.grid;
    double acc = 0.0;
    int k[3];
    for (size_t i = 0; i < s.data.size(); ++i) {
        wavevector(g, i, k);
        const int klast = k[g.dim - 1];
        const double w = (klast == 0 || klast == g.n / 2) ? 1.0 : 2.0;
        acc += w * std::norm(s.data[i]);
    }
    return std::sqrt(acc * g.volume());
}

double mode_coefficient(const Spectrum& s, const Mode& m) {
    const double vol = s.grid.volume();
    const size_t idx = storage_index(s.grid, m.k.data());
    if (m.kind == Mode::Constant) return std::sqrt(vol) * s.data[idx].real();
    if (m.kind == Mode::Cosine) return std::sqrt(2.0 * vol) * s.data[idx].real();
    return -std::sqrt(2.0 * vol) * s.data[idx].imag();
}

void add_mode(Spectrum& s, const Mode& m, double coef) {
    const double vol = s.grid.volume();
    const size_t idx = storage_index(s.grid, m.k.data());
    if (m.kind == Mode::Constant) {
        s.data[idx] += coef / std::sqrt(vol);
    } else if (m.kind == Mode::Cosine) {
        s.data[idx] += coef / std::sqrt(2.0 * vol);
    } else {
        s.data[idx] += std::complex<double>(0.0, -coef / std::sqrt(2.0 * vol));
    }
    if (m.k[s.grid.dim - 1] == 0 && m.kind != Mode::Constant) {
        int mk[3] = {-m.k[0], -m.k[1], -m.k[2]};
        mk[s.grid.dim - 1] = 0;
        s.data[storage_index(s.grid, mk)] = std::conj(s.data[idx]);
    }
}

void write_field(const std::string& path_base, const Field& f) {
    {
        std::ofstream bin(path_base + ".f64", std::ios::binary);
        if (!bin) throw ConfigError("write_field: cannot open " + path_base + ".f64");
        bin.write(reinterpret_cast<const char*>(f.data.data()),
                  static_cast<std::streamsize>(sizeof(double) * f.data.size()));
    }
    nlohmann::ordered_json j;
    j["dimension"] = f.grid.dim;
    j["points_per_axis"] = f.grid.n;
    j["axis_length"] = TorusGrid::axis_length;
    j["layout"] = "row-major";
    j["dtype"] = "float64-le";
    j["units"] = f.units;
    std::ofstream meta(path_base + ".json");
    meta << j.dump(2) << "\n";
}

Field read_field(const std::string& path_base) {
    std::ifstream meta(path_base + ".json");
    if (!meta) throw ConfigError("read_field: missing sidecar " + path_base + ".json");
    nlohmann::json j;
    meta >> j;
    TorusGrid g{j.at("dimension").get<int>(), j.at("points_per_axis").get<int>()};
    Field f(g);
    f.units = j.value("units", "");
    std::ifstream bin(path_base + ".f64", std::ios::binary);
    if (!bin) throw ConfigError("read_field: missing payload " + path_base + ".f64");
    bin.read(reinterpret_cast<char*>(f.data.data()),
             static_cast<std::streamsize>(sizeof(double) * f.data.size()));
    if (static_cast<size_t>(bin.gcount()) != sizeof(double) * f.data.size())
        throw ConfigError("read_field: payload size mismatch for " + path_base);
    return f;
}

}  // namespace bifluidlab::spectral

#pragma once
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "bifluid_lab/errors.hpp"

namespace bifluidlab::spectral {

// Periodic box [0, 2pi)^dim sampled on n points per axis.
struct TorusGrid {
    int dim = 2;
    int n = 64;

    static constexpr double axis_length = 6.283185307179586476925286766559;

    void validate() const;  // dim in 1..3, n a power of two >= 4
    size_t points() const;
    size_t spec_points() const;  // r2c storage: n^(dim-1) * (n/2+1)
    double cell_volume() const;
    double volume() const;
    double dx() const { return axis_length / n; }
    bool operator==(const TorusGrid&) const = default;
};

struct Field {
    TorusGrid grid;
    std::vector<double> data;
    std::string units;

    Field() = default;
    explicit Field(TorusGrid g, double fill = 0.0)
        : grid(g), data(g.points(), fill) {}
};

struct VectorField {
    TorusGrid grid;
    std::vector<Field> comp;

    VectorField() = default;
    explicit VectorField(TorusGrid g) : grid(g) {
        for (int a = 0; a < g.dim; ++a) comp.emplace_back(g);
    }
};

// Normalized r2c spectrum: field(x) = sum_k data[k] exp(i k.x) with the
// conjugate half implied.
struct Spectrum {
    TorusGrid grid;
    std::vector<std::complex<double>> data;

    Spectrum() = default;
    explicit Spectrum(TorusGrid g) : grid(g), data(g.spec_points(), {0.0, 0.0}) {}
};

// Real trigonometric scalar modes, orthonormal in L^2, ordered by |k|^2,
// then lexicographically by the canonical wavevector, cosine before sine.
// Nyquist-bearing wavevectors are excluded (they carry no stable derivative).
struct Mode {
    enum Kind { Constant = 0, Cosine = 1, Sine = 2 };
    std::array<int, 3> k{0, 0, 0};
    Kind kind = Constant;
    double k2 = 0.0;
};

const std::vector<Mode>& mode_table(const TorusGrid& grid);

// wavevector of a flat r2c storage index (k[last] >= 0), and its inverse
void wavevector(const TorusGrid& g, size_t flat, int k[3]);
size_t storage_index(const TorusGrid& g, const int k[3]);
bool carries_nyquist(const TorusGrid& g, const int k[3]);

Spectrum forward(const Field& f);
Field inverse(const Spectrum& s);

VectorField gradient(const Field& f);
Field divergence(const VectorField& v);
Field laplacian(const Field& f);

// Solves  Delta g = f - mean(f)  with mean(g) = 0.
Field laplacian_inverse(const Field& f);

// grad Delta^{-1} of the mean-free part: divergence(inv_div(f)) = f - mean(f).
VectorField inv_div(const Field& f);

// Spectral projection with symbol k k^T / |k|^2 (gradient-part extractor);
// the mean mode maps to zero.
VectorField riesz(const VectorField& v);

// Orthogonal projection onto the first N modes of mode_table(grid).
Field project_modes(const Field& f, int N);

// Pointwise product evaluated on a 3n/2 zero-padded grid (2/3-rule
// dealiasing for quadratic terms).
Field dealiased_product(const Field& a, const Field& b);

Field translate(const Field& f, const std::array<int, 3>& cells);

double mean(const Field& f);
double integral(const Field& f);        // grid quadrature
double l2_norm(const Field& f);         // sqrt(integral f^2)
double linf_norm(const Field& f);
double inner(const Field& a, const Field& b);
double spectral_l2(const Spectrum& s);  // Parseval partner of l2_norm

// Coefficient of an orthonormal mode in a spectrum, and its synthesis.
double mode_coefficient(const Spectrum& s, const Mode& m);
void add_mode(Spectrum& s, const Mode& m, double coef);

// Raw little-endian float64 payload at <path_base>.f64 plus a JSON sidecar
// at <path_base>.json with the grid metadata.
void write_field(const std::string& path_base, const Field& f);
Field read_field(const std::string& path_base);

}  // namespace bifluidlab::spectral

#include "perfomag/tensors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace perfomag {

namespace {

double harmonic(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

// Material-average of one coefficient entry over the corrector's domain.
double entry_average(const CellGrid& grid, const CellCoeffFn& coeff,
                     CellDomain domain, int i, int j) {
    const int nz = grid.dim == 3 ? grid.n : 1;
    const double vol = std::pow(grid.h, grid.dim);
    double sum = 0.0;
    for (int k = 0; k < nz; ++k)
        for (int jy = 0; jy < grid.n; ++jy)
            for (int ix = 0; ix < grid.n; ++ix) {
                std::size_t v = grid.index(ix, jy, k);
                if (domain == CellDomain::material && grid.mask[v] == 0)
                    continue;
                sum += vol * coeff(grid.voxel_center(ix, jy, k))(i, j);
            }
    return sum;
}

// M over the corrector's domain of the face-based gradient d_{y_i} omega.
double gradient_average(const CorrectorField& corr, int i) {
    const CellGrid& grid = *corr.grid;
    if (i >= grid.dim) return 0.0;
    const double vol = std::pow(grid.h, grid.dim);
    double sum = 0.0;
    for (std::size_t v = 0; v < grid.size(); ++v)
        sum += vol * corr.face_grad[i][v];
    return sum;
}

// M over material voxels of (mu grad omega)_i, mixed face/voxel quadrature
// matching flux_moment but without the background e_dir term (used by H1).
double flux_average_no_background(const CellGrid& grid, const CellCoeffFn& mu,
                                  const CorrectorField& corr, int i) {
    if (i >= grid.dim) return 0.0;
    const int nz = grid.dim == 3 ? grid.n : 1;
    const double h = grid.h;
    const double vol = std::pow(h, grid.dim);
    std::vector<Mat3> C(grid.size());
    for (int k = 0; k < nz; ++k)
        for (int jy = 0; jy < grid.n; ++jy)
            for (int ix = 0; ix < grid.n; ++ix)
                C[grid.index(ix, jy, k)] =
                    mu(grid.voxel_center(ix, jy, k));
    auto wrap = [&](int a, int n) {
        return a < 0 ? a + n : (a >= n ? a - n : a);
    };
    auto mat = [&](std::size_t v) {
        return corr.domain == CellDomain::full || grid.mask[v] != 0;
    };

    double sum = 0.0;
    for (int k = 0; k < nz; ++k)
        for (int jy = 0; jy < grid.n; ++jy)
            for (int ix = 0; ix < grid.n; ++ix) {
                std::size_t v = grid.index(ix, jy, k);
                if (!mat(v)) continue;
                int cn[3] = {ix, jy, k};
                cn[i] += 1;
                std::size_t vq = grid.index(wrap(cn[0], grid.n),
                                            wrap(cn[1], grid.n),
                                            wrap(cn[2], nz));
                if (mat(vq))
                    sum += vol * harmonic(C[v](i, i), C[vq](i, i)) *
                           corr.face_grad[i][v];
                for (int l = 0; l < grid.dim; ++l) {
                    if (l == i) continue;
                    double cil = C[v](i, l);
                    if (cil == 0.0) continue;
                    int cp[3] = {ix, jy, k}, cm[3] = {ix, jy, k};
                    cp[l] += 1;
                    cm[l] -= 1;
                    std::size_t vp = grid.index(wrap(cp[0], grid.n),
                                                wrap(cp[1], grid.n),
                                                wrap(cp[2], nz));
                    std::size_t vm = grid.index(wrap(cm[0], grid.n),
                                                wrap(cm[1], grid.n),
                                                wrap(cm[2], nz));
                    bool hp = mat(vp), hm = mat(vm);
                    double dl = 0.0;
                    if (hp && hm)
                        dl = (corr.values[vp] - corr.values[vm]) / (2.0 * h);
                    else if (hp)
                        dl = (corr.values[vp] - corr.values[v]) / h;
                    else if (hm)
                        dl = (corr.values[v] - corr.values[vm]) / h;
                    sum += vol * cil * dl;
                }
            }
    return sum;
}

}  // namespace

Mat3 effective_diffusion(const CellGrid& grid, const CellCoeffFn& coeff,
                         const std::vector<CorrectorField>& correctors) {
    if (static_cast<int>(correctors.size()) < grid.dim)
        throw std::runtime_error(
            "effective_diffusion: missing corrector direction");
    Mat3 out;
    for (int j = 0; j < grid.dim; ++j) {
        const CorrectorField& c = correctors[j];
        if (c.grid != &grid)
            throw std::runtime_error("effective_diffusion: grid mismatch");
        if (c.direction != j)
            throw std::runtime_error(
                "effective_diffusion: corrector direction mismatch");
        for (int i = 0; i < 3; ++i) out(i, j) = flux_moment(c, coeff, i);
    }
    if (grid.dim == 2) {
        // third column: no corrector for the out-of-plane direction
        for (int i = 0; i < 3; ++i)
            out(i, 2) = entry_average(grid, coeff, CellDomain::material, i, 2);
    }
    return out;
}

FieldCoupling field_coupling(const CellGrid& grid, const CellCoeffFn& mu,
                             const std::vector<CorrectorField>& bar1_interior,
                             const std::vector<CorrectorField>& bar1_exterior,
                             const std::vector<CorrectorField>& bar2) {
    FieldCoupling fc;
    fc.mu_star_in = effective_diffusion(grid, mu, bar1_interior);
    fc.mu_star_out = effective_diffusion(grid, mu, bar1_exterior);

    const double chi = porosity(grid);
    for (int j = 0; j < 3; ++j) {
        const bool have = j < grid.dim;
        const CorrectorField* b1 = have ? &bar1_interior[j] : nullptr;
        const CorrectorField* b2 = have ? &bar2[j] : nullptr;
        if (have && (b1->grid != &grid || b2->grid != &grid))
            throw std::runtime_error("field_coupling: grid mismatch");
        for (int i = 0; i < 3; ++i) {
            double d = i == j ? 1.0 : 0.0;
            // mu_bar_{ij} = delta_{ij} + M_{Y*}(d_{y_i} bar-omega1_j)
            fc.mu_bar(i, j) = d + (have ? gradient_average(*b1, i) : 0.0);
            // H2_{ij} = delta_{ij} + M_{Y*}(d_{y_i} bar-omega2_j)
            fc.H2(i, j) = d + (have ? gradient_average(*b2, i) : 0.0);
            // H1_{ij} = M_Y(chi (delta_{ij} + sum_k mu_{ik} d_{y_k} b2_j))
            fc.H1(i, j) =
                chi * d +
                (have ? flux_average_no_background(grid, mu, *b2, i) : 0.0);
        }
    }
    return fc;
}

CurieTensor curie_tensor(const Mat3& H2, double theta_c) {
    if (!(theta_c > 0.0))
        throw std::runtime_error("curie_tensor: theta_c must be > 0");
    CurieTensor ct;
    ct.theta_c_scalar = theta_c;
    ct.H2_sym = H2.sym();
    ct.asymmetry_defect = H2.symmetry_defect();
    ct.Theta_c = Mat3::identity() * theta_c + ct.H2_sym;
    EigenSym3 eig = jacobi_eigen_sym3(ct.Theta_c, 1e-12);
    ct.eigenvalues = eig.values;
    ct.eigenvectors = eig.vectors;
    return ct;
}

EffectiveTensors assemble_effective_tensors(const CellGrid& grid,
                                            const CellCoeffFn& A,
                                            const CellCoeffFn& K,
                                            const CellCoeffFn& mu,
                                            const CorrectorSet& correctors,
                                            double theta_c) {
    EffectiveTensors t;
    t.A_star = effective_diffusion(grid, A, correctors.omega_A);
    t.K_star = effective_diffusion(grid, K, correctors.omega_hat_K);
    FieldCoupling fc =
        field_coupling(grid, mu, correctors.bar1_interior,
                       correctors.bar1_exterior, correctors.bar2);
    t.mu_star_in = fc.mu_star_in;
    t.mu_star_out = fc.mu_star_out;
    t.mu_bar = fc.mu_bar;
    t.H1 = fc.H1;
    t.H2 = fc.H2;
    t.chi_bar = porosity(grid);
    t.curie = curie_tensor(t.H2, theta_c);
    return t;
}

Mat3 voigt_tensor(const CellGrid& grid, const CellCoeffFn& coeff) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = entry_average(grid, coeff, CellDomain::material, i, j);
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TensorReport::Entry report_entry(const std::string& name, const Mat3& m) {
    TensorReport::Entry e;
    e.name = name;
    e.value = m;
    e.symmetry_defect = m.symmetry_defect();
    EigenSym3 eig = jacobi_eigen_sym3(m, 1e-12);
    e.eigenvalues = eig.values;
    e.positive_definite = eig.values[0] > 0.0;
    return e;
}

}  // namespace

TensorReport tensor_report(const EffectiveTensors& t) {
    TensorReport r;
    r.chi_bar = t.chi_bar;
    r.entries.push_back(report_entry("A_star", t.A_star));
    r.entries.push_back(report_entry("K_star", t.K_star));
    r.entries.push_back(report_entry("mu_star_in", t.mu_star_in));
    r.entries.push_back(report_entry("mu_star_out", t.mu_star_out));
    r.entries.push_back(report_entry("mu_bar", t.mu_bar));
    r.entries.push_back(report_entry("H1", t.H1));
    r.entries.push_back(report_entry("H2", t.H2));
    r.entries.push_back(report_entry("Theta_c", t.curie.Theta_c));
    r.curie_eigenvalues = t.curie.eigenvalues;
    return r;
}

std::string TensorReport::to_csv() const {
    std::ostringstream os;
    os << "tensor,entry_i,entry_j,value\n";
    for (const auto& e : entries)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                os << e.name << ',' << (i + 1) << ',' << (j + 1) << ','
                   << fmt(e.value(i, j)) << '\n';
    os << "porosity,0,0," << fmt(chi_bar) << '\n';
    for (const auto& e : entries) {
        os << e.name << "_symmetry_defect,0,0," << fmt(e.symmetry_defect)
           << '\n';
        for (int i = 0; i < 3; ++i)
            os << e.name << "_eigenvalue," << (i + 1) << ",0,"
               << fmt(e.eigenvalues[i]) << '\n';
    }
    for (std::size_t i = 0; i < voigt_margins.size(); ++i)
        os << "voigt_margin," << (i + 1) << ",0," << fmt(voigt_margins[i])
           << '\n';
    return os.str();
}

std::string TensorReport::to_text() const {
    std::ostringstream os;
    os << "effective tensor report (porosity chi_bar = " << fmt(chi_bar)
       << ")\n";
    for (const auto& e : entries) {
        os << "\n" << e.name << ":\n";
        for (int i = 0; i < 3; ++i) {
            os << "  [";
            for (int j = 0; j < 3; ++j)
                os << (j ? ", " : " ") << fmt(e.value(i, j));
            os << " ]\n";
        }
        os << "  symmetry defect " << fmt(e.symmetry_defect)
           << ", eigenvalues (" << fmt(e.eigenvalues[0]) << ", "
           << fmt(e.eigenvalues[1]) << ", " << fmt(e.eigenvalues[2]) << ")"
           << (e.positive_definite ? "" : "  ** NOT positive definite **")
           << "\n";
    }
    if (!voigt_margins.empty()) {
        os << "\nVoigt margins x.(M_Y(chi A) - A*)x:";
        for (double m : voigt_margins) os << ' ' << fmt(m);
        os << '\n';
    }
    return os.str();
}

}  // namespace perfomag

#ifndef PERFOMAG_TENSORS_HPP
#define PERFOMAG_TENSORS_HPP

#include <string>
#include <vector>

#include "perfomag/cell.hpp"
#include "perfomag/smallmat.hpp"

namespace perfomag {

// theta_c * I + sym(H2): the affine shift that makes the homogenized
// quadratic form (theta*I - Theta_c) m.m change sign at the eigenvalues.
// Uniform theta above the largest eigenvalue leaves m = 0 as the unique
// minimizer; below the smallest one m = 0 is not a local minimizer.
struct CurieTensor {
    double theta_c_scalar = 0.0;
    Mat3 H2_sym;
    Mat3 Theta_c;
    std::array<double, 3> eigenvalues{};  // ascending
    Mat3 eigenvectors;                    // columns
    double asymmetry_defect = 0.0;        // ||H2 - H2^T||_inf
};

struct EffectiveTensors {
    Mat3 A_star, K_star;
    Mat3 mu_star_in, mu_star_out;
    Mat3 mu_bar;
    Mat3 H1, H2;
    double chi_bar = 1.0;
    CurieTensor curie;
};

// A*_{ij} = M_{Y*}(C_{ij} + sum_k C_{ik} d_{y_k} omega_j); entry (i,j) =
// flux_moment(corr_j, C, i). In 2-D the third row/column is the plain
// material average of the corresponding C entries.
Mat3 effective_diffusion(const CellGrid& grid, const CellCoeffFn& coeff,
                         const std::vector<CorrectorField>& correctors);

struct FieldCoupling {
    Mat3 mu_star_in, mu_star_out, mu_bar, H1, H2;
};

FieldCoupling field_coupling(const CellGrid& grid, const CellCoeffFn& mu,
                             const std::vector<CorrectorField>& bar1_interior,
                             const std::vector<CorrectorField>& bar1_exterior,
                             const std::vector<CorrectorField>& bar2);

CurieTensor curie_tensor(const Mat3& H2, double theta_c);

EffectiveTensors assemble_effective_tensors(const CellGrid& grid,
                                            const CellCoeffFn& A,
                                            const CellCoeffFn& K,
                                            const CellCoeffFn& mu,
                                            const CorrectorSet& correctors,
                                            double theta_c);

// Symmetry defects, eigenvalues, Voigt margins and porosity, both
// machine-readable (flat CSV rows `tensor,entry_i,entry_j,value`) and as a
// human-readable text block.
struct TensorReport {
    struct Entry {
        std::string name;
        Mat3 value;
        double symmetry_defect;
        std::array<double, 3> eigenvalues;
        bool positive_definite;
    };
    std::vector<Entry> entries;
    double chi_bar = 1.0;
    // x.(Voigt - A*)x on axis and diagonal test vectors, Voigt = M_Y(chi A)
    std::vector<double> voigt_margins;
    std::array<double, 3> curie_eigenvalues{};

    std::string to_csv() const;
    std::string to_text() const;
};

TensorReport tensor_report(const EffectiveTensors& t);

// M_Y(chi_{Y*} C): the Voigt (arithmetic-mean) tensor bounding A* from
// above.
Mat3 voigt_tensor(const CellGrid& grid, const CellCoeffFn& coeff);

}  // namespace perfomag

#endif

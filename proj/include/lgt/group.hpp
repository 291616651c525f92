#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgt/error.hpp"

namespace lgt {

using Elem = int;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Finite group given by its multiplication table. Element 0 is the identity.
class GroupTable {
public:
    GroupTable(int order, std::vector<Elem> mul, std::string name = "custom",
               std::vector<std::string> labels = {});

    int order() const { return n_; }
    static constexpr Elem identity() { return 0; }
    Elem mul(Elem a, Elem b) const { return mul_[static_cast<std::size_t>(a) * n_ + b]; }
    Elem inv(Elem a) const { return inv_[a]; }
    Elem power(Elem g, long long k) const;
    int element_order(Elem g) const;
    bool is_abelian() const { return abelian_; }
    int class_of(Elem g) const { return class_of_[g]; }
    int class_count() const { return n_classes_; }
    const std::string& name() const { return name_; }
    std::string label(Elem g) const;

private:
    int n_;
    std::vector<Elem> mul_;
    std::vector<Elem> inv_;
    std::vector<int> class_of_;
    int n_classes_ = 0;
    bool abelian_ = true;
    std::string name_;
    std::vector<std::string> labels_;
};

using GroupPtr = std::shared_ptr<const GroupTable>;

GroupPtr build_cyclic(int n);
GroupPtr build_symmetric(int n);
GroupPtr build_dihedral(int n);
GroupPtr build_quaternion();

// e^{2 pi i m / n}, exact at multiples of 30 degrees.
Complex unit_root(long long m, long long n);

class UnitaryRep {
public:
    UnitaryRep(GroupPtr group, std::vector<CMatrix> matrices, std::string id);

    const GroupTable& group() const { return *group_; }
    const GroupPtr& group_ptr() const { return group_; }
    int dim() const { return dim_; }
    const std::string& id() const { return id_; }
    const CMatrix& matrix(Elem g) const { return mats_[g]; }

    // Class function: averaged over the conjugacy class so conjugates agree bit for bit.
    Complex character(Elem g) const { return chi_[g]; }
    // Re(chi(1) - chi(g)), identical for g, its conjugates and its inverse.
    double gap(Elem g) const { return gap_[g]; }

    double unitarity_residual() const;
    double homomorphism_residual() const;

private:
    GroupPtr group_;
    int dim_;
    std::vector<CMatrix> mats_;
    std::string id_;
    std::vector<Complex> chi_;
    std::vector<double> gap_;
};

using RepPtr = std::shared_ptr<const UnitaryRep>;

RepPtr cyclic_character_rep(GroupPtr group, long long k);
RepPtr regular_faithful_subrep(GroupPtr group);
// Permutation representation of S_n restricted to the zero-sum subspace.
RepPtr standard_rep(GroupPtr symmetric_group, int n);
RepPtr dihedral_rep(GroupPtr dihedral_group, int n);
RepPtr quaternion_rep(GroupPtr quaternion_group);

bool is_faithful(const UnitaryRep& rep);

struct RepSpectrum {
    double delta_g = 0.0;
    std::vector<Elem> g0;
    CMatrix a_limit;
    double a_limit_op_norm = 0.0;
    bool faithful = true;
};

RepSpectrum spectrum(const UnitaryRep& rep);

double phi_beta(const UnitaryRep& rep, double beta, Elem g);
double r_beta(const UnitaryRep& rep, double beta);
double log_r_beta(const UnitaryRep& rep, double beta);

struct ABeta {
    CMatrix matrix;
    Eigen::VectorXd eigenvalues;
    double op_norm = 0.0;
};

ABeta a_beta(const UnitaryRep& rep, double beta);

double c_beta_main(const UnitaryRep& rep, double beta);
double c_beta_abelian(const UnitaryRep& rep, double beta);

// Largest absolute eigenvalue of a Hermitian matrix (symmetrized first).
double hermitian_op_norm(const CMatrix& m);

}  // namespace lgt

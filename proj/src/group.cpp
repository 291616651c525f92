#include "lgt/group.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace lgt {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidOrder: return "invalid-order";
        case ErrorKind::InvalidGroup: return "invalid-group";
        case ErrorKind::InvalidRep: return "invalid-rep";
        case ErrorKind::NotCyclic: return "not-cyclic";
        case ErrorKind::OrderTooSmall: return "order-too-small";
        case ErrorKind::DegenerateSpectrum: return "degenerate-spectrum";
        case ErrorKind::WrongRegime: return "wrong-regime";
        case ErrorKind::InvalidPair: return "invalid-pair";
        case ErrorKind::Degree: return "degree";
        case ErrorKind::NotACycle: return "not-a-cycle";
        case ErrorKind::NotClosed: return "not-closed";
        case ErrorKind::Budget: return "budget";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::ConditioningOnNull: return "conditioning-on-null";
        case ErrorKind::Normalization: return "normalization";
        case ErrorKind::Config: return "config";
    }
    return "error";
}

GroupTable::GroupTable(int order, std::vector<Elem> table, std::string name,
                       std::vector<std::string> labels)
    : n_(order), mul_(std::move(table)), name_(std::move(name)), labels_(std::move(labels)) {
    if (n_ < 1) throw LgtError(ErrorKind::InvalidOrder, "group order must be positive");
    const auto n = static_cast<std::size_t>(n_);
    if (mul_.size() != n * n) throw LgtError(ErrorKind::InvalidGroup, "multiplication table has wrong size");
    if (!labels_.empty() && labels_.size() != n)
        throw LgtError(ErrorKind::InvalidGroup, "label count does not match order");
    for (Elem v : mul_)
        if (v < 0 || v >= n_) throw LgtError(ErrorKind::InvalidGroup, "table entry out of range");
    for (Elem g = 0; g < n_; ++g)
        if (mul(0, g) != g || mul(g, 0) != g)
            throw LgtError(ErrorKind::InvalidGroup, "element 0 is not the identity");

    inv_.assign(n, -1);
    for (Elem g = 0; g < n_; ++g) {
        for (Elem h = 0; h < n_; ++h) {
            if (mul(g, h) == 0) {
                inv_[g] = h;
                break;
            }
        }
        if (inv_[g] < 0 || mul(inv_[g], g) != 0)
            throw LgtError(ErrorKind::InvalidGroup, "element " + std::to_string(g) + " has no inverse");
    }

    auto assoc = [&](Elem a, Elem b, Elem c) { return mul(mul(a, b), c) == mul(a, mul(b, c)); };
    if (n_ <= 64) {
        for (Elem a = 0; a < n_; ++a)
            for (Elem b = 0; b < n_; ++b)
                for (Elem c = 0; c < n_; ++c)
                    if (!assoc(a, b, c)) throw LgtError(ErrorKind::InvalidGroup, "table is not associative");
    } else {
        std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
        std::uniform_int_distribution<Elem> pick(0, n_ - 1);
        for (int t = 0; t < 20000; ++t)
            if (!assoc(pick(rng), pick(rng), pick(rng)))
                throw LgtError(ErrorKind::InvalidGroup, "table is not associative");
    }

    for (Elem a = 0; a < n_ && abelian_; ++a)
        for (Elem b = a + 1; b < n_; ++b)
            if (mul(a, b) != mul(b, a)) {
                abelian_ = false;
                break;
            }

    class_of_.assign(n, -1);
    for (Elem g = 0; g < n_; ++g) {
        if (class_of_[g] >= 0) continue;
        for (Elem h = 0; h < n_; ++h) class_of_[mul(mul(h, g), inv_[h])] = n_classes_;
        ++n_classes_;
    }
}

Elem GroupTable::power(Elem g, long long k) const {
    if (k < 0) {
        g = inv(g);
        k = -k;
    }
    Elem result = 0;
    Elem base = g;
    while (k > 0) {
        if (k & 1) result = mul(result, base);
        base = mul(base, base);
        k >>= 1;
    }
    return result;
}

int GroupTable::element_order(Elem g) const {
    int k = 1;
    for (Elem x = g; x != 0; x = mul(x, g)) ++k;
    return k;
}

std::string GroupTable::label(Elem g) const {
    if (!labels_.empty()) return labels_[g];
    return std::to_string(g);
}

GroupPtr build_cyclic(int n) {
    if (n < 1) throw LgtError(ErrorKind::InvalidOrder, "cyclic group needs n >= 1");
    std::vector<Elem> mul(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) mul[static_cast<std::size_t>(a) * n + b] = (a + b) % n;
    return std::make_shared<GroupTable>(n, std::move(mul), "z" + std::to_string(n));
}

GroupPtr build_symmetric(int n) {
    if (n < 2 || n > 6) throw LgtError(ErrorKind::InvalidOrder, "symmetric group needs 2 <= n <= 6");
    std::vector<std::vector<int>> perms;
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    const int order = static_cast<int>(perms.size());
    auto index_of = [&](const std::vector<int>& q) {
        return static_cast<Elem>(std::lower_bound(perms.begin(), perms.end(), q) - perms.begin());
    };
    std::vector<Elem> mul(static_cast<std::size_t>(order) * order);
    std::vector<int> q(n);
    for (int a = 0; a < order; ++a)
        for (int b = 0; b < order; ++b) {
            for (int i = 0; i < n; ++i) q[i] = perms[a][perms[b][i]];
            mul[static_cast<std::size_t>(a) * order + b] = index_of(q);
        }
    std::vector<std::string> labels;
    for (const auto& perm : perms) {
        std::string s = "[";
        for (int i = 0; i < n; ++i) s += std::to_string(perm[i]) + (i + 1 < n ? " " : "]");
        labels.push_back(s);
    }
    return std::make_shared<GroupTable>(order, std::move(mul), "s" + std::to_string(n), std::move(labels));
}

GroupPtr build_dihedral(int n) {
    if (n < 3) throw LgtError(ErrorKind::InvalidOrder, "dihedral group needs n >= 3");
    // Element r^k s^j has index k + n*j.
    const int order = 2 * n;
    std::vector<Elem> mul(static_cast<std::size_t>(order) * order);
    for (int a = 0; a < order; ++a)
        for (int b = 0; b < order; ++b) {
            const int ka = a % n, ja = a / n, kb = b % n, jb = b / n;
            const int k = ((ka + (ja ? -kb : kb)) % n + n) % n;
            const int j = (ja + jb) % 2;
            mul[static_cast<std::size_t>(a) * order + b] = k + n * j;
        }
    std::vector<std::string> labels;
    for (int a = 0; a < order; ++a)
        labels.push_back("r" + std::to_string(a % n) + (a / n ? "s" : ""));
    return std::make_shared<GroupTable>(order, std::move(mul), "d" + std::to_string(n), std::move(labels));
}

GroupPtr build_quaternion() {
    // Index 2u + (sign < 0) with unit u in {1, i, j, k}.
    static const int unit_mul[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static const int unit_sign[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};
    std::vector<Elem> mul(64);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            const int ua = a / 2, ub = b / 2;
            int sign = (a % 2 ? -1 : 1) * (b % 2 ? -1 : 1) * unit_sign[ua][ub];
            mul[a * 8 + b] = 2 * unit_mul[ua][ub] + (sign < 0 ? 1 : 0);
        }
    return std::make_shared<GroupTable>(8, std::move(mul), "q8",
                                        std::vector<std::string>{"1", "-1", "i", "-i", "j", "-j", "k", "-k"});
}

Complex unit_root(long long m, long long n) {
    m %= n;
    if (m < 0) m += n;
    if ((12 * m) % n == 0) {
        const double h = std::sqrt(3.0) / 2.0;
        static const double c[12] = {1, 0, 0.5, 0, -0.5, 0, -1, 0, -0.5, 0, 0.5, 0};
        static const double s[12] = {0, 0.5, 0, 1, 0, 0.5, 0, -0.5, 0, -1, 0, -0.5};
        const long long t = 12 * m / n;
        double re = c[t], im = s[t];
        if (t == 1 || t == 11) re = h;
        if (t == 5 || t == 7) re = -h;
        if (t == 2 || t == 4) im = h;
        if (t == 8 || t == 10) im = -h;
        return {re, im};
    }
    return std::polar(1.0, 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(n));
}

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<Elem> generating_set(const GroupTable& g) {
    std::vector<Elem> gens;
    std::vector<bool> reached(g.order(), false);
    reached[0] = true;
    std::vector<Elem> span{0};
    for (Elem cand = 1; cand < g.order(); ++cand) {
        if (reached[cand]) continue;
        gens.push_back(cand);
        // Closure of span under right multiplication by all generators.
        span.assign(1, 0);
        std::fill(reached.begin(), reached.end(), false);
        reached[0] = true;
        for (std::size_t i = 0; i < span.size(); ++i)
            for (Elem s : gens) {
                const Elem x = g.mul(span[i], s);
                if (!reached[x]) {
                    reached[x] = true;
                    span.push_back(x);
                }
            }
    }
    return gens;
}

// Orthonormal basis of the zero-sum subspace of C^n (Helmert basis), as columns.
Eigen::MatrixXd helmert_basis(int n) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n - 1);
    for (int j = 1; j < n; ++j) {
        const double s = 1.0 / std::sqrt(static_cast<double>(j) * (j + 1));
        for (int i = 0; i < j; ++i) q(i, j - 1) = s;
        q(j, j - 1) = -j * s;
    }
    return q;
}

}  // namespace

UnitaryRep::UnitaryRep(GroupPtr group, std::vector<CMatrix> matrices, std::string id)
    : group_(std::move(group)), mats_(std::move(matrices)), id_(std::move(id)) {
    if (!group_) throw LgtError(ErrorKind::InvalidRep, "null group");
    const int n = group_->order();
    if (static_cast<int>(mats_.size()) != n)
        throw LgtError(ErrorKind::InvalidRep, "need one matrix per group element");
    dim_ = static_cast<int>(mats_[0].rows());
    if (dim_ < 1) throw LgtError(ErrorKind::InvalidRep, "dimension must be positive");
    for (const auto& m : mats_)
        if (m.rows() != dim_ || m.cols() != dim_)
            throw LgtError(ErrorKind::InvalidRep, "matrix dimensions disagree");
    if (mats_[0] != CMatrix::Identity(dim_, dim_))
        throw LgtError(ErrorKind::InvalidRep, "identity element must map to the identity matrix");
    if (unitarity_residual() > 1e-12) throw LgtError(ErrorKind::InvalidRep, "matrices are not unitary");
    if (homomorphism_residual() > 1e-12) throw LgtError(ErrorKind::InvalidRep, "not a homomorphism");

    const GroupTable& g = *group_;
    std::vector<Complex> raw(n);
    for (Elem x = 0; x < n; ++x) raw[x] = mats_[x].trace();
    std::vector<Complex> class_sum(g.class_count(), 0.0);
    std::vector<int> class_size(g.class_count(), 0);
    for (Elem x = 0; x < n; ++x) {
        class_sum[g.class_of(x)] += raw[x];
        ++class_size[g.class_of(x)];
    }
    chi_.resize(n);
    for (Elem x = 0; x < n; ++x) chi_[x] = class_sum[g.class_of(x)] / static_cast<double>(class_size[g.class_of(x)]);
    chi_[0] = Complex(dim_, 0.0);
    gap_.resize(n);
    for (Elem x = 0; x < n; ++x) {
        const double re = 0.5 * (chi_[x].real() + chi_[g.inv(x)].real());
        gap_[x] = x == 0 ? 0.0 : dim_ - re;
    }

    for (Elem x = 0; x < n; ++x)
        if (std::abs(chi_[x] - std::conj(chi_[g.inv(x)])) > 1e-12)
            throw LgtError(ErrorKind::InvalidRep, "character is not conjugate symmetric");
}

double UnitaryRep::unitarity_residual() const {
    double worst = 0.0;
    const CMatrix id = CMatrix::Identity(dim_, dim_);
    for (const auto& m : mats_) worst = std::max(worst, max_abs(m.adjoint() * m - id));
    return worst;
}

double UnitaryRep::homomorphism_residual() const {
    const GroupTable& g = *group_;
    const double cost = static_cast<double>(g.order()) * g.order() * dim_ * dim_ * dim_;
    std::vector<Elem> rhs;
    if (cost <= 5e7) {
        rhs.resize(g.order());
        std::iota(rhs.begin(), rhs.end(), 0);
    } else {
        rhs = generating_set(g);  // rho(gs) = rho(g) rho(s) for generators s implies the rest
    }
    double worst = 0.0;
    for (Elem a = 0; a < g.order(); ++a)
        for (Elem b : rhs) worst = std::max(worst, max_abs(mats_[g.mul(a, b)] - mats_[a] * mats_[b]));
    return worst;
}

RepPtr cyclic_character_rep(GroupPtr group, long long k) {
    const int n = group->order();
    Elem gen = -1;
    for (Elem x = 0; x < n && gen < 0; ++x)
        if (group->element_order(x) == n) gen = x;
    if (gen < 0) throw LgtError(ErrorKind::NotCyclic, group->name() + " is not cyclic");
    std::vector<CMatrix> mats(n, CMatrix::Identity(1, 1));
    Elem x = 0;
    for (long long j = 0; j < n; ++j) {
        mats[x](0, 0) = j == 0 ? Complex(1.0, 0.0) : unit_root(j * k, n);
        x = group->mul(x, gen);
    }
    std::string id = group->name() + "-k" + std::to_string(k);
    if (n == 2 && ((k % 2) + 2) % 2 == 1) id = group->name() + "-sign";
    return std::make_shared<UnitaryRep>(std::move(group), std::move(mats), id);
}

RepPtr regular_faithful_subrep(GroupPtr group) {
    const int n = group->order();
    if (n < 3) throw LgtError(ErrorKind::OrderTooSmall, "regular subrep needs |G| >= 3");
    const Eigen::MatrixXd q = helmert_basis(n);
    std::vector<CMatrix> mats;
    mats.reserve(n);
    for (Elem g = 0; g < n; ++g) {
        if (g == 0) {
            mats.push_back(CMatrix::Identity(n - 1, n - 1));
            continue;
        }
        Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
        for (Elem h = 0; h < n; ++h) r(group->mul(g, h), h) = 1.0;
        mats.push_back((q.transpose() * r * q).cast<Complex>());
    }
    std::string id = group->name() + "-regular-sub";
    return std::make_shared<UnitaryRep>(std::move(group), std::move(mats), id);
}

RepPtr standard_rep(GroupPtr symmetric_group, int n) {
    const int order = symmetric_group->order();
    int fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    if (fact != order) throw LgtError(ErrorKind::InvalidGroup, "group order is not n!");
    // Recover each permutation from the labels written by build_symmetric.
    const Eigen::MatrixXd q = helmert_basis(n);
    std::vector<CMatrix> mats;
    for (Elem g = 0; g < order; ++g) {
        if (g == 0) {
            mats.push_back(CMatrix::Identity(n - 1, n - 1));
            continue;
        }
        const std::string lab = symmetric_group->label(g);
        std::vector<int> perm;
        for (char c : lab)
            if (c >= '0' && c <= '9') perm.push_back(c - '0');
        if (static_cast<int>(perm.size()) != n)
            throw LgtError(ErrorKind::InvalidGroup, "standard rep needs a group from build_symmetric");
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) p(perm[i], i) = 1.0;
        mats.push_back((q.transpose() * p * q).cast<Complex>());
    }
    std::string id = symmetric_group->name() + "-std" + std::to_string(n - 1);
    return std::make_shared<UnitaryRep>(std::move(symmetric_group), std::move(mats), id);
}

RepPtr dihedral_rep(GroupPtr dihedral_group, int n) {
    if (dihedral_group->order() != 2 * n) throw LgtError(ErrorKind::InvalidGroup, "group order is not 2n");
    std::vector<CMatrix> mats;
    for (Elem g = 0; g < 2 * n; ++g) {
        if (g == 0) {
            mats.push_back(CMatrix::Identity(2, 2));
            continue;
        }
        const Complex w = unit_root(g % n, n);
        CMatrix rot(2, 2);
        rot << w.real(), -w.imag(), w.imag(), w.real();
        if (g / n) {
            CMatrix flip(2, 2);
            flip << 1, 0, 0, -1;
            rot = rot * flip;
        }
        mats.push_back(rot);
    }
    std::string id = dihedral_group->name() + "-std2";
    return std::make_shared<UnitaryRep>(std::move(dihedral_group), std::move(mats), id);
}

RepPtr quaternion_rep(GroupPtr quaternion_group) {
    if (quaternion_group->order() != 8) throw LgtError(ErrorKind::InvalidGroup, "quaternion group has order 8");
    const Complex i(0.0, 1.0);
    CMatrix units[4];
    units[0] = CMatrix::Identity(2, 2);
    units[1] = CMatrix(2, 2);
    units[1] << i, 0, 0, -i;
    units[2] = CMatrix(2, 2);
    units[2] << 0, 1, -1, 0;
    units[3] = CMatrix(2, 2);
    units[3] << 0, i, i, 0;
    std::vector<CMatrix> mats;
    for (Elem g = 0; g < 8; ++g) mats.push_back(g % 2 ? CMatrix(-units[g / 2]) : units[g / 2]);
    return std::make_shared<UnitaryRep>(std::move(quaternion_group), std::move(mats), "q8-2d");
}

bool is_faithful(const UnitaryRep& rep) {
    const CMatrix id = CMatrix::Identity(rep.dim(), rep.dim());
    for (Elem g = 1; g < rep.group().order(); ++g)
        if (max_abs(rep.matrix(g) - id) <= 1e-10) return false;
    return true;
}

double hermitian_op_norm(const CMatrix& m) {
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

RepSpectrum spectrum(const UnitaryRep& rep) {
    RepSpectrum s;
    const int n = rep.group().order();
    const int d = rep.dim();
    s.faithful = is_faithful(rep);
    s.a_limit = CMatrix::Zero(d, d);
    if (n == 1) return s;
    s.delta_g = std::numeric_limits<double>::infinity();
    for (Elem g = 1; g < n; ++g) s.delta_g = std::min(s.delta_g, rep.gap(g));
    const double tol = 1e-10 * std::max(s.delta_g, 1.0);
    for (Elem g = 1; g < n; ++g)
        if (std::abs(rep.gap(g) - s.delta_g) <= tol) s.g0.push_back(g);
    for (Elem g : s.g0) s.a_limit += rep.matrix(g);
    s.a_limit /= static_cast<double>(s.g0.size());
    s.a_limit = 0.5 * (s.a_limit + s.a_limit.adjoint()).eval();
    s.a_limit_op_norm = hermitian_op_norm(s.a_limit);
    return s;
}

double phi_beta(const UnitaryRep& rep, double beta, Elem g) { return std::exp(-beta * rep.gap(g)); }

double r_beta(const UnitaryRep& rep, double beta) {
    double r = 0.0;
    for (Elem g = 1; g < rep.group().order(); ++g) r += std::exp(-6.0 * beta * rep.gap(g));
    return r;
}

double log_r_beta(const UnitaryRep& rep, double beta) {
    const int n = rep.group().order();
    if (n == 1) return -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (Elem g = 1; g < n; ++g) lo = std::min(lo, rep.gap(g));
    double sum = 0.0;
    for (Elem g = 1; g < n; ++g) sum += std::exp(-6.0 * beta * (rep.gap(g) - lo));
    return -6.0 * beta * lo + std::log(sum);
}

ABeta a_beta(const UnitaryRep& rep, double beta) {
    const int n = rep.group().order();
    const int d = rep.dim();
    ABeta out;
    out.matrix = CMatrix::Zero(d, d);
    if (n > 1) {
        double lo = std::numeric_limits<double>::infinity();
        for (Elem g = 1; g < n; ++g) lo = std::min(lo, rep.gap(g));
        double total = 0.0;
        for (Elem g = 1; g < n; ++g) {
            const double w = std::exp(-6.0 * beta * (rep.gap(g) - lo));
            out.matrix += w * rep.matrix(g);
            total += w;
        }
        out.matrix /= total;
    }
    out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(out.matrix, Eigen::EigenvaluesOnly);
    out.eigenvalues = solver.eigenvalues();
    out.op_norm = out.eigenvalues.cwiseAbs().maxCoeff();
    return out;
}

double c_beta_main(const UnitaryRep& rep, double beta) {
    const double norm = a_beta(rep, beta).op_norm;
    if (norm >= 1.0)
        throw LgtError(ErrorKind::DegenerateSpectrum, "||A_beta||_op >= 1 for " + rep.id());
    const double log_term = norm == 0.0 ? std::numeric_limits<double>::infinity() : std::ldexp(-std::log(norm), -19);
    return std::min({0.15, log_term, 1.0 - norm});
}

double c_beta_abelian(const UnitaryRep& rep, double beta) {
    if (rep.dim() != 1) throw LgtError(ErrorKind::WrongRegime, "abelian c_beta needs a 1-d rep");
    const double a = a_beta(rep, beta).matrix(0, 0).real();
    if (std::abs(a) >= 1.0) throw LgtError(ErrorKind::DegenerateSpectrum, "|A_beta| >= 1 for " + rep.id());
    const double log_term = a == 0.0 ? std::numeric_limits<double>::infinity() : -0.5 * std::log(std::abs(a));
    return std::min({0.15, log_term, 1.0 - a});
}

}  // namespace lgt

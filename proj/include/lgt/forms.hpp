#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "lgt/group.hpp"
#include "lgt/lattice.hpp"

namespace lgt {

// Group-valued k-form on the positive k-cells of a region (Abelian G, written additively
// through GroupTable::mul). Values on negative cells are implied by oddness.
struct KForm {
    int degree = 0;
    std::vector<Elem> values;
};

using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Integer-valued k-form (chain) on the positive k-cells.
struct IntForm {
    int degree = 0;
    IntVector values;
};

KForm zero_form(const CellComplex& cx, int degree);
IntForm zero_int_form(const CellComplex& cx, int degree);
KForm edge_indicator(const CellComplex& cx, std::size_t edge, Elem g);

KForm exterior_derivative(const CellComplex& cx, const GroupTable& g, const KForm& f);
KForm coderivative(const CellComplex& cx, const GroupTable& g, const KForm& f);
IntForm exterior_derivative(const CellComplex& cx, const IntForm& f);
IntForm coderivative(const CellComplex& cx, const IntForm& f);

// sum_c h(c) f(c) for forms of equal degree.
Elem pairing(const GroupTable& g, const KForm& f, const IntForm& h);

IntForm loop_form(const CellComplex& cx, const Loop& loop);

// Integer 2-form S inside the bounding box of the cycle with coderivative(S) = cycle.
IntForm surface_fill(const CellComplex& cx, const IntForm& cycle);
IntForm surface_fill(const CellComplex& cx, const Loop& loop);

// 1-form h with dh = q for a closed 2-form q on the whole region; h vanishes on the
// region boundary whenever q does.
KForm poincare_primitive(const CellComplex& cx, const GroupTable& g, const KForm& q);

nlohmann::json to_json(const KForm& f);
nlohmann::json to_json(const IntForm& f);
KForm kform_from_json(const nlohmann::json& doc);
IntForm intform_from_json(const nlohmann::json& doc);

}  // namespace lgt

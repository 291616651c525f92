#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lgt/group.hpp"

namespace lgt {

// Group ids: "z<n>", "d<n>", "s<n>", "q8".
GroupPtr group_by_id(const std::string& id);

// Rep ids: "z2-sign", "z<n>-k<k>", "<group>-regular-sub", "s3-std2", "s4-std3",
// "d<n>-std2", "q8-2d".
RepPtr rep_by_id(const std::string& id);

struct CatalogEntry {
    std::string id;
    bool irreducible;
};

// The built-in reps used by tests and the CLI listing.
std::vector<CatalogEntry> builtin_reps();

struct CustomGroup {
    GroupPtr group;
    std::vector<RepPtr> reps;
};

// {order, mul_table, reps: [{dim, matrices: [[[re, im], ...], ...]}]}
CustomGroup load_custom_group(const nlohmann::json& doc, const std::string& name = "custom");

}  // namespace lgt

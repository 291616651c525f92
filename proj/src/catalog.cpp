#include "lgt/catalog.hpp"

#include <regex>

namespace lgt {

GroupPtr group_by_id(const std::string& id) {
    std::smatch m;
    static const std::regex pattern(R"(([zdsZDS])(\d+))");
    if (id == "q8") return build_quaternion();
    if (std::regex_match(id, m, pattern)) {
        const int n = std::stoi(m[2]);
        switch (std::tolower(m[1].str()[0])) {
            case 'z':
                if (n > 64) throw LgtError(ErrorKind::Config, "catalog cyclic groups stop at z64");
                return build_cyclic(n);
            case 'd': return build_dihedral(n);
            case 's': return build_symmetric(n);
        }
    }
    throw LgtError(ErrorKind::Config, "unknown group id '" + id + "'");
}

RepPtr rep_by_id(const std::string& id) {
    static const std::regex cyclic_char(R"(z(\d+)-k(-?\d+))");
    static const std::regex regular(R"((\w+)-regular-sub)");
    std::smatch m;
    if (id == "z2-sign") return cyclic_character_rep(build_cyclic(2), 1);
    if (id == "q8-2d") return quaternion_rep(build_quaternion());
    if (id == "s3-std2") return standard_rep(build_symmetric(3), 3);
    if (id == "s4-std3") return standard_rep(build_symmetric(4), 4);
    if (std::regex_match(id, m, cyclic_char)) {
        auto group = group_by_id("z" + m[1].str());
        return cyclic_character_rep(group, std::stoll(m[2]));
    }
    if (std::regex_match(id, m, regular)) return regular_faithful_subrep(group_by_id(m[1]));
    static const std::regex dihedral(R"(d(\d+)-std2)");
    if (std::regex_match(id, m, dihedral)) {
        const int n = std::stoi(m[1]);
        return dihedral_rep(build_dihedral(n), n);
    }
    throw LgtError(ErrorKind::Config, "unknown rep id '" + id + "'");
}

std::vector<CatalogEntry> builtin_reps() {
    return {
        {"z2-sign", true},   {"z3-k1", true},    {"z4-k1", true},    {"z5-k1", true},
        {"z6-k1", true},     {"d3-std2", true},  {"d4-std2", true},  {"d5-std2", true},
        {"s3-std2", true},   {"s4-std3", true},  {"q8-2d", true},    {"z3-regular-sub", false},
        {"z5-regular-sub", false}, {"s3-regular-sub", false}, {"q8-regular-sub", false},
    };
}

CustomGroup load_custom_group(const nlohmann::json& doc, const std::string& name) {
    try {
        const int order = doc.at("order").get<int>();
        std::vector<Elem> mul;
        const auto& table = doc.at("mul_table");
        if (static_cast<int>(table.size()) != order)
            throw LgtError(ErrorKind::InvalidGroup, "mul_table needs one row per element");
        for (const auto& row : table) {
            if (static_cast<int>(row.size()) != order)
                throw LgtError(ErrorKind::InvalidGroup, "mul_table rows must have length order");
            for (const auto& v : row) mul.push_back(v.get<int>());
        }
        CustomGroup out;
        out.group = std::make_shared<GroupTable>(order, std::move(mul), name);
        if (doc.contains("reps")) {
            int idx = 0;
            for (const auto& r : doc.at("reps")) {
                const int d = r.at("dim").get<int>();
                const auto& mats = r.at("matrices");
                if (static_cast<int>(mats.size()) != order)
                    throw LgtError(ErrorKind::InvalidRep, "need one matrix per element");
                std::vector<CMatrix> ms;
                for (const auto& mj : mats) {
                    CMatrix m(d, d);
                    if (static_cast<int>(mj.size()) != d) throw LgtError(ErrorKind::InvalidRep, "bad matrix rows");
                    for (int a = 0; a < d; ++a) {
                        if (static_cast<int>(mj[a].size()) != d)
                            throw LgtError(ErrorKind::InvalidRep, "bad matrix columns");
                        for (int b = 0; b < d; ++b) m(a, b) = Complex(mj[a][b][0].get<double>(), mj[a][b][1].get<double>());
                    }
                    ms.push_back(std::move(m));
                }
                out.reps.push_back(std::make_shared<UnitaryRep>(out.group, std::move(ms),
                                                                name + "-rep" + std::to_string(idx++)));
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw LgtError(ErrorKind::Config, std::string("custom group: ") + e.what());
    }
}

}  // namespace lgt

#pragma once

#include "optlab/catalog.hpp"
#include "optlab/ir.hpp"
#include "optlab/parser.hpp"

namespace optlab {

// Binds a parsed statement to the catalog: tables to oids, columns to
// (rti, ordinal, levels_up), hints to rel sets. Subquery expressions become
// sublinks; join syntax is flattened into quals and SpecialJoinInfos.
QueryTree resolve(const AstSelect& ast, const Catalog& cat);

// Convenience: parse + resolve + validate.
QueryTree analyze_query(const std::string& sql, const Catalog& cat);

}  // namespace optlab

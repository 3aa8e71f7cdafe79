#pragma once

#include <string>

#include "modloc/subspace.hpp"

namespace modloc {

// JSON layout:
//   { "ambient_dim": n,
//     "basis": [ [[re,im], ...ambient_dim entries], ...dim entries ],
//     "tol": {"abs_tol": ..., "rank_tol": ...} }
// Doubles survive the round trip bit-exactly (shortest-roundtrip printing).
std::string subspace_to_json(const real_subspace_t& h);
real_subspace_t subspace_from_json(const std::string& text);

void save_subspace(const std::string& path, const real_subspace_t& h);
real_subspace_t load_subspace(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Little-endian float64 (re,im) pairs, preceded by a human-readable JSON
// descriptor when written through the grid-state helpers in the cone module.
void write_complex_binary(const std::string& path, const cvec_t& v);
cvec_t read_complex_binary(const std::string& path);

}  // namespace modloc

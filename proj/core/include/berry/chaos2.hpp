#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "berry/field.hpp"
#include "berry/geometry.hpp"

namespace berry {

struct ChaosSample {
  double raw = 0.0;
  double normalized = 0.0;
  double factor = 0.0;  // normalized / raw
  long nodes = 0;       // quadrature nodes used
};

// Gauss-Legendre node count for a stretch of length `len`:
// max(20, ceil(10 sqrt(E) len)), times `refine`.
int chaos_nodes(double energy, double len, int refine = 1);

// phi_E(C) = (8 pi sqrt(2E))^-1 sum_k int_0^{L_k} B <grad B, n_k> dt.
// normalized = 4 pi E^{1/4} raw.
ChaosSample phi_boundary(const PlaneWaveField& field, const PolygonalChain& chain,
                         int refine = 1);
double phi_tilde(const PlaneWaveField& field, const PolygonalChain& chain, int refine = 1);
double phi_normalization(double energy);

// L_E[2](D) = (pi sqrt(2E) / 8) [-2 int_D B^2 + int_D |grad~ B|^2] by tensor
// Gauss-Legendre quadrature. Degenerate rectangles give 0.
double chaos2_domain_raw(const PlaneWaveField& field, const RectDomain& d, int refine = 1);
// Adds normalized = sqrt(512 pi / log E) raw; throws NormalizationError when
// E <= e.
ChaosSample chaos2_domain(const PlaneWaveField& field, const RectDomain& d, int refine = 1);

// R^-1 L(b; R D)[2] for the canonical unit-eigenvalue field b sampled from
// (seed, replication). n_waves = 0 picks the default for the rescaled window.
double rescaled_chaos2(const RectDomain& d, double R, std::uint64_t seed,
                       std::uint64_t replication, int n_waves = 0, int refine = 1);

void write_chaos_csv_header(std::ostream& os);
void write_chaos_csv_row(std::ostream& os, std::uint64_t rep, const std::string& chain_id,
                         const ChaosSample& s);

}  // namespace berry

#pragma once

#include <string>

#include "pwcip/grid.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Field persistence: a compact binary dump (magic "PWCIP1", little-endian,
// header with the grid layout and a time-axis descriptor, then row-major
// 64-bit floats) and CSV exports keyed by node coordinates. All text output
// formats doubles with 17 significant digits so reruns are byte-identical.
// ---------------------------------------------------------------------------

void write_field_dump(const std::string& path, const SemiDiscreteField& f, double t_max = -1.0);
SemiDiscreteField read_field_dump(const std::string& path, double* t_max = nullptr);

void field_to_csv(const std::string& path, const SemiDiscreteField& f, double t_max = -1.0);
void gamma_to_csv(const std::string& path, const GammaTrace& g);
void theta_to_csv(const std::string& path, const ThetaTrace& g);

std::string format_double(double v);  // shortest round-trip-safe decimal

}  // namespace pwcip

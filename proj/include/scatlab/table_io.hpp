#pragma once
// CSV emission and parsing for spectrum tables and boundary estimates.
//
// Every spectrum CSV starts with one comment line carrying the grid and the
// scene digest, e.g.
//   # scatlab kind=sls dimension=2 center=0;0 radius=10 omega=1;0 resolution=512 ...
// followed by a header row and one row per sample, in cell order. Readers
// rebuild the grid from the comment and map rows back to their cells.

#include "scatlab/rigidity.hpp"
#include "scatlab/spectra.hpp"

#include <iosfwd>
#include <string>

namespace scatlab {

/// Significant digits for CSV output: SCATLAB_PRECISION if set (1..17), else 17.
int output_precision();

void write_table_csv(std::ostream& out, const SpectrumTable& table, int precision = 17);
/// Throws IoError on malformed input.
SpectrumTable read_table_csv(std::istream& in);

SpectrumTable load_table_csv(const std::string& path);
void save_table_csv(const std::string& path, const SpectrumTable& table, int precision = 17);

void write_reconstruction_csv(std::ostream& out, const BoundaryEstimate& estimate, int dimension, int precision = 17);

/// Per-cell discrepancies followed by nothing else; the summary goes to the console.
void write_discrepancy_csv(std::ostream& out, const DiscrepancyReport& report, int precision = 17);

std::string join_itinerary(const std::vector<std::size_t>& itinerary);

} // namespace scatlab

#pragma once
// Deterministic CSV/JSON emission (fixed %.12g formatting, stable key
// order, no timestamps) so identical configs give byte-identical files.

#include <string>
#include <vector>

#include "speclab/degeneration.hpp"
#include "speclab/parametrix.hpp"

namespace speclab {

std::string fmt_g(double v);  // %.12g

void write_text(const std::string& path, const std::string& content);

std::string profile_csv(const Profile& p, int n_samples);
std::string spectrum_csv(const SpectrumResult& s);
std::string spectrum_json(const SpectrumResult& s);
std::string samples_csv(const std::vector<HeatTraceSample>& samples, double eps);
std::string zeta_json(const ZetaResult& z);
std::string renorm_csv(const RenormTrace& rt);
std::string renorm_zeta_json(const RenormZeta& rz);
std::string sweep_csv(const SweepResult& r);
std::string sweep_fit_json(const SweepResult& r);
std::string sweep_prediction_json(const SweepResult& r);
std::string sweep_plotdata(const SweepResult& r);  // gnuplot whitespace columns
std::string threeterm_csv(const ThreeTermReport& rep);

}  // namespace speclab

#pragma once

#include "ppfa/monitoring.hpp"

#include <filesystem>
#include <string>

namespace ppfa {

/// Model files are JSON objects with a fixed key order:
///
///   format, version, m, r, s,
///   beta   (s rows × r), H (m rows × r), tau2 (r), sigma2 (m),
///   whitening { mean (m), eigvecs (m rows × m), singvals (m) },
///   dynamics  { D (rs rows × rs) },
///   limits    { alpha, psi_T2, psi_SPE, psi_DI,
///               bandwidth_T2, bandwidth_SPE, bandwidth_DI }
///
/// Doubles are printed in shortest round-trip form, so save → load is exact.
std::string model_to_string(const PpfaModel& model);
PpfaModel model_from_string(const std::string& text);

void save_model(const PpfaModel& model, const std::filesystem::path& path);
PpfaModel load_model(const std::filesystem::path& path);

} // namespace ppfa

#pragma once

#include <string>

#include "hctl/controller.hpp"
#include "hctl/harmonic.hpp"
#include "hctl/periodic_matrix.hpp"

namespace hctl {

inline constexpr int kArtifactSchemaVersion = 1;

/// {"omega", "h", "channels", "re": [[...]], "im": [[...]]}
std::string  phasor_to_json(const PhasorVector& X);
PhasorVector phasor_from_json(const std::string& text);

/// {"omega", "h", "rows", "cols", "re": [k][i][j], "im": [k][i][j]}, k = -h..h
std::string    periodic_to_json(const PeriodicMatrix& P);
PeriodicMatrix periodic_from_json(const std::string& text);

/// Whole artifact with gains, coefficients, setpoint summary and synthesis report.
std::string        artifact_to_json(const ControllerArtifact& a, int indent = 1);
ControllerArtifact artifact_from_json(const std::string& text);

std::string report_to_json(const SynthesisReport& r, int indent = 1);

void               save_artifact(const ControllerArtifact& a, const std::string& path);
ControllerArtifact load_artifact(const std::string& path);

}  // namespace hctl

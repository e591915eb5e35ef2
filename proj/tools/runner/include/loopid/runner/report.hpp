#pragma once

#include <string>

namespace loopid::runner {

/// Plain-text summary of a finished run: estimation table (median theta_hat
/// per method and T, read from estimates.csv), verdicts, one block per
/// diagnostic and the figure list. Writes report.txt beside the manifest and
/// returns the text. Throws RunError naming the first missing artifact.
std::string render_report(const std::string& manifest_path);

}  // namespace loopid::runner

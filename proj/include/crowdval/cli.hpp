#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCampaignFail = 3;

// Runs one subcommand: profile | simulate | reshape | incentives | report.
// args excludes the program name.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crowdval::cli

#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or parameter error,
// 2 a statistical check failed.

#include <ostream>
#include <string>
#include <vector>

namespace majorant::cli {

/// args excludes the program name. Data and reports go to --out (stdout by
/// default, written to `out`); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace majorant::cli

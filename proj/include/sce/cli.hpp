#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sce::cli {

// Exit status: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace sce::cli

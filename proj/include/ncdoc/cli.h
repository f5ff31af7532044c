// cli.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end. Exit codes: 0 success, 1 usage, 2 data error,
// 3 internal error.

#ifndef NCDOC_CLI_H_
#define NCDOC_CLI_H_

#include <iosfwd>

namespace ncdoc {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace ncdoc

#endif  // NCDOC_CLI_H_

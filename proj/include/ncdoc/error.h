// error.h
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
// Exception types shared by all modules. The command-line front end maps
// them onto exit codes: UsageError -> 1, DataError -> 2, anything else -> 3.

#ifndef NCDOC_ERROR_H_
#define NCDOC_ERROR_H_

#include <stdexcept>
#include <string>

namespace ncdoc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, lattices, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad invocation: unknown subcommand, missing flag, invalid argument value.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncdoc

#endif  // NCDOC_ERROR_H_

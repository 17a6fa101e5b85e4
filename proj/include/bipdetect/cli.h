// Copyright 2026 The bipdetect Authors.
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

#ifndef BIPDETECT_CLI_H_
#define BIPDETECT_CLI_H_

#include <iosfwd>

namespace bipdetect {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitBudget = 2,
  kExitIo = 3,
};

// Runs one command line (argv[0] is the program name). Results go to `out`
// or the --out path; failures print one JSON line to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace bipdetect

#endif  // BIPDETECT_CLI_H_

// Copyright 2026 The qdyn developers.
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
#pragma once

namespace qdyn::app {

// Parses argv, runs one experiment subcommand, and writes its data CSV plus
// JSON sidecar. Returns the process exit status: 0 on success, 2 on any
// configuration problem, 3 on a numerical failure during the run.
int run(int argc, const char* const* argv);

}  // namespace qdyn::app

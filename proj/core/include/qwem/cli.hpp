#pragma once

namespace qwem {

// Parses argv and runs one pipeline subcommand (gen, ingest, stats, target,
// factorize, train, dynamics, eval, taskvec, report). Returns the process
// exit code: 0 on success, 1 on usage errors (unknown flags, bad values),
// 2 on data errors (missing or malformed inputs).
int run_cli(int argc, char** argv);

}  // namespace qwem

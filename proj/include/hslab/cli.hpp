#ifndef HSLAB_CLI_HPP
#define HSLAB_CLI_HPP

namespace hslab {

// Entry point for the command-line tool. Exit codes: 0 success, 1 an
// unsuccessful outcome (learner FAIL, no consistent baseline, failed lemma
// verdict, boosting giving up), 2 usage or input error, 3 numeric failure
// (whitening non-convergence or a degenerate projection).
int cli_dispatch(int argc, char** argv);

}  // namespace hslab

#endif  // HSLAB_CLI_HPP

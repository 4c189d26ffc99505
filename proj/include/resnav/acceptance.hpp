#pragma once

// Built-in acceptance suite: fixed scenarios and oracle comparisons, each
// with a pass/fail verdict and a runtime budget.

#include "resnav/sim.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace resnav::acceptance
{

struct CriterionResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;
};

// Scenarios shared with the unit tests and the example files.

/// Both GPS sources biased by +20 m laterally from 3 s to 10 s at 30 m/s.
sim::Scenario outage_scenario(bool gating = true);

/// Forced wall-follow on the bottom straight starting 5 m from the right
/// wall (gap error 1 m).
sim::Scenario wallfollow_scenario();

/// Two pylon pairs on the bottom straight at 31 m/s.
sim::Scenario pylon_scenario();

struct Criterion
{
    int id;
    std::string name;
    double budget; // seconds
    std::function<CriterionResult()> run;
};

std::vector<Criterion> criteria();

/// Runs every criterion (or only `only` when non-empty), prints one line per
/// criterion to `os`, and returns the results.
std::vector<CriterionResult> run_all(std::ostream &os, const std::vector<int> &only = {});

} // namespace resnav::acceptance

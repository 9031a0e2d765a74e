#pragma once

#include <string>
#include <vector>

#include "kmc/weights.hpp"

namespace kmc {

// One branch of the derivative-transfer tree. Rendered as a symbol vector of
// length n+1 whose entries are "0" before the distinguished interval, the
// distinguished operation at it, and "e" after (reversed for the forward
// tree).
struct BranchSymbol {
    enum class Kind {
        base_ibp,        // local IBP weight at interval k
        correction,      // backward correction weight at interval j
        merged_transfer, // boundary merged with the next exchange weight
        merged_local,    // boundary from the local IBP, merged
        fwd_ibp,         // forward-tree IBP weight
        fwd_correction   // forward-tree correction weight
    };
    Kind kind;
    int index; // 1-based distinguished interval
};

std::vector<BranchSymbol> enumerate_branches(int n_jumps, bool backward);
std::vector<std::string> symbol_sequence(const BranchSymbol& s, int n_jumps);

enum class SumMode { collapsed, explicit_intervals };

// How the terminal transition is turned into a density factor when estimating
// density derivatives: `reflected` pins the final increment so that it lands
// on the evaluation point and uses the matching conditional density (exact);
// `plain` multiplies the sampled branch by the unreflected Gaussian factor.
enum class DensityFactor { reflected, plain };

// One replication of E[f(X_T) 1{alive}].
double value_term(const Model& model, const Normalization& norm, const TestFunction& f,
                  const Path& path);

// One replication of T E[f'(X_T) 1{alive}].
double ibp_backward_term(const Model& model, const Normalization& norm, const TestFunction& f,
                         const Path& path, SumMode mode = SumMode::collapsed);

// One replication of T d/dx0 E[f(X_T) 1{alive}].
double bel_term(const Model& model, const Normalization& norm, const TestFunction& f,
                const Path& path, SumMode mode = SumMode::collapsed);

// One replication of T d/dz p(T, x0, z) for the killed transition density.
double density_derivative_terminal(const Model& model, const Normalization& norm,
                                   const Path& path, double z,
                                   DensityFactor factor = DensityFactor::reflected);

// One replication of T d/dx0 p(T, x0, z).
double density_derivative_initial(const Model& model, const Normalization& norm,
                                  const Path& path, double z,
                                  DensityFactor factor = DensityFactor::reflected);

struct ReplicationResult {
    double value = 0.0;
    double ibp = 0.0;
    double bel = 0.0;
};

ReplicationResult replicate_all(const Model& model, const Normalization& norm,
                                const TestFunction& f, const Path& path);

} // namespace kmc

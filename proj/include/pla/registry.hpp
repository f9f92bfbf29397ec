#pragma once

#include "pla/value.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pla {

struct Connective {
    std::string name;
    int arity = 1; // -1: variadic, at least one argument
    bool continuous = true;
    std::function<Value(const std::vector<Value>&)> fn;
};

enum class AggClass { Continuous, Admissible, Neither };

const char* agg_class_name(AggClass c);

// convergence-testing parameter: cluster point c with limiting proportion alpha
struct CtParam {
    Rational c;
    Rational alpha;
};

struct AggregationFunction {
    std::string name;     // as written in formulas, e.g. "am" or "lengthpow(1/2)"
    int arity = 1;        // number of input sequences
    AggClass cls = AggClass::Continuous;
    std::function<Value(const std::vector<std::vector<Value>>&)> fn;
    // limiting value on convergence-testing sequences with the given
    // parameters; null iff cls == Neither. For Admissible functions callers
    // must drop alpha=0 entries first (only justified by exact emptiness).
    std::function<Value(const std::vector<std::vector<CtParam>>&)> ct_limit;
};

using ConnectivePtr = std::shared_ptr<const Connective>;
using AggregationPtr = std::shared_ptr<const AggregationFunction>;

// Built-in connectives {not, and, or, implies, product, affine} and
// aggregation functions {max, min, am, gm, lengthpow(beta), tsum, noisyor}.
class Registry {
public:
    static const Registry& builtin();

    ConnectivePtr connective(const std::string& name) const;           // null if unknown
    AggregationPtr aggregation(const std::string& name) const;         // handles lengthpow(beta)
    const std::vector<ConnectivePtr>& connectives() const { return conns_; }
    const std::vector<AggregationPtr>& aggregations() const { return aggs_; }
    bool is_reserved(const std::string& name) const;

private:
    Registry();
    std::vector<ConnectivePtr> conns_;
    std::vector<AggregationPtr> aggs_;
};

AggregationPtr make_lengthpow(const Rational& beta);

} // namespace pla

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "efmuon/matrix.hpp"

namespace efmuon {

struct ConstantStep {
    double lambda = 0.0;
};
/// lambda_t = 1 / (t + 1)
struct InvTStep {};
/// lambda_t = 1 / sqrt(t + 1)
struct InvSqrtTStep {};
/// Explicit values; the last value repeats past the end of the table.
struct TableStep {
    std::vector<double> values;
};
/// lambda_t = lambda * |M_t|_nuc
struct AdaptiveNuclearStep {
    double lambda = 0.0;
};
/// Arbitrary rule of the step counter and the current momentum buffer.
struct CustomStep {
    std::function<double(std::size_t, const Matrix&)> rule;
};

class StepSchedule {
public:
    using Variant = std::variant<ConstantStep, InvTStep, InvSqrtTStep, TableStep, AdaptiveNuclearStep, CustomStep>;

    StepSchedule(Variant v) : v_{std::move(v)} { validate(); }  // NOLINT(google-explicit-constructor)

    static StepSchedule constant(double lambda) { return StepSchedule{Variant{ConstantStep{lambda}}}; }
    static StepSchedule inv_t() { return StepSchedule{Variant{InvTStep{}}}; }
    static StepSchedule inv_sqrt_t() { return StepSchedule{Variant{InvSqrtTStep{}}}; }
    static StepSchedule table(std::vector<double> values) { return StepSchedule{Variant{TableStep{std::move(values)}}}; }
    static StepSchedule adaptive_nuclear(double lambda) { return StepSchedule{Variant{AdaptiveNuclearStep{lambda}}}; }
    static StepSchedule custom(std::function<double(std::size_t, const Matrix&)> rule) {
        return StepSchedule{Variant{CustomStep{std::move(rule)}}};
    }

    const Variant& variant() const noexcept { return v_; }

    /// True when lambda_t depends on the momentum buffer.
    bool adaptive() const noexcept {
        return std::holds_alternative<AdaptiveNuclearStep>(v_) || std::holds_alternative<CustomStep>(v_);
    }

    bool needs_nuclear() const noexcept { return std::holds_alternative<AdaptiveNuclearStep>(v_); }

    /// Offline stepsize. Throws for adaptive schedules.
    double at(std::size_t t) const {
        if (const auto* c = std::get_if<ConstantStep>(&v_))
            return c->lambda;
        if (std::holds_alternative<InvTStep>(v_))
            return 1.0 / (static_cast<double>(t) + 1.0);
        if (std::holds_alternative<InvSqrtTStep>(v_))
            return 1.0 / std::sqrt(static_cast<double>(t) + 1.0);
        if (const auto* tb = std::get_if<TableStep>(&v_))
            return t < tb->values.size() ? tb->values[t] : tb->values.back();
        throw std::logic_error("StepSchedule::at: schedule depends on the momentum buffer");
    }

    /// Stepsize given the momentum buffer and, when already known, its nuclear norm.
    double at(std::size_t t, const Matrix& momentum, std::optional<double> momentum_nuclear = std::nullopt) const {
        if (const auto* a = std::get_if<AdaptiveNuclearStep>(&v_)) {
            if (!momentum_nuclear)
                throw std::logic_error("StepSchedule: adaptive nuclear schedule needs |M_t|_nuc");
            return a->lambda * *momentum_nuclear;
        }
        if (const auto* c = std::get_if<CustomStep>(&v_)) {
            const double v = c->rule(t, momentum);
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("StepSchedule: custom rule returned an invalid stepsize");
            return v;
        }
        return at(t);
    }

    /// Offline schedules that never increase.
    bool nonincreasing() const {
        if (adaptive())
            return false;
        if (const auto* tb = std::get_if<TableStep>(&v_)) {
            for (std::size_t i = 1; i < tb->values.size(); ++i)
                if (tb->values[i] > tb->values[i - 1])
                    return false;
        }
        return true;
    }

    /// lim_{t -> inf} lambda_t for offline schedules.
    double limit() const {
        if (const auto* c = std::get_if<ConstantStep>(&v_))
            return c->lambda;
        if (const auto* tb = std::get_if<TableStep>(&v_))
            return tb->values.back();
        if (adaptive())
            throw std::logic_error("StepSchedule::limit: undefined for adaptive schedules");
        return 0.0;
    }

    /// First index from which lambda_t equals its limit, if such an index exists.
    std::optional<std::size_t> settles_at() const {
        if (std::holds_alternative<ConstantStep>(v_))
            return 0;
        if (const auto* tb = std::get_if<TableStep>(&v_)) {
            std::size_t i = tb->values.size() - 1;
            while (i > 0 && tb->values[i - 1] == tb->values.back())
                --i;
            return i;
        }
        return std::nullopt;
    }

    std::string name() const {
        switch (v_.index()) {
        case 0: return "constant";
        case 1: return "inv_t";
        case 2: return "inv_sqrt_t";
        case 3: return "table";
        case 4: return "adaptive_nuclear";
        default: return "custom";
        }
    }

private:
    static bool positive(double x) { return x > 0.0 && std::isfinite(x); }

    static void check(const ConstantStep& c) {
        if (!positive(c.lambda))
            throw std::invalid_argument("StepSchedule: constant stepsize must be positive");
    }
    static void check(const TableStep& tb) {
        if (tb.values.empty())
            throw std::invalid_argument("StepSchedule: empty table");
        if (!std::all_of(tb.values.begin(), tb.values.end(), positive))
            throw std::invalid_argument("StepSchedule: table stepsizes must be positive");
    }
    static void check(const AdaptiveNuclearStep& a) {
        if (!positive(a.lambda))
            throw std::invalid_argument("StepSchedule: adaptive base stepsize must be positive");
    }
    static void check(const CustomStep& c) {
        if (!c.rule)
            throw std::invalid_argument("StepSchedule: empty custom rule");
    }
    static void check(const InvTStep&) {}
    static void check(const InvSqrtTStep&) {}

    void validate() const {
        std::visit([](const auto& s) { check(s); }, v_);
    }

    Variant v_;
};

}  // namespace efmuon

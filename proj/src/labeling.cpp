#include "socsig/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "json.hpp"

#include "socsig/csv.hpp"
#include "socsig/error.hpp"

namespace socsig::labeling {

double compute_threshold(std::span<const int> values) {
    if (values.empty()) throw ValidationError("threshold of an empty rating set is undefined");
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    return sum / static_cast<double>(values.size());
}

std::vector<int> binarize(std::span<const int> values, double threshold) {
    if (!std::isfinite(threshold)) throw ValidationError("binarization threshold must be finite");
    std::vector<int> labels;
    labels.reserve(values.size());
    for (int v : values) labels.push_back(v > threshold ? 1 : 0);
    return labels;
}

double high_fraction(std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    const auto high = std::count(labels.begin(), labels.end(), 1);
    return static_cast<double>(high) / static_cast<double>(labels.size());
}

ClassWeights class_weights(std::span<const int> labels) {
    const auto n = static_cast<double>(labels.size());
    const auto n_high = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double n_low = n - n_high;
    if (n_high == 0.0 || n_low == 0.0) {
        throw ValidationError("class weights need both classes present");
    }
    return {n / n_low, n / n_high};
}

std::string_view to_string(ExclusionReason r) {
    switch (r) {
    case ExclusionReason::none: return "";
    case ExclusionReason::no_ratings: return "no_ratings";
    case ExclusionReason::single_class: return "single_class";
    case ExclusionReason::below_min_high_fraction: return "below_min_high_fraction";
    }
    return "?";
}

ExclusionReason parse_exclusion_reason(std::string_view s) {
    for (auto r : {ExclusionReason::none, ExclusionReason::no_ratings, ExclusionReason::single_class,
                   ExclusionReason::below_min_high_fraction}) {
        if (to_string(r) == s) return r;
    }
    throw ValidationError("unknown exclusion reason '" + std::string(s) + "'");
}

SignalStatus assess_signal(SignalId signal, std::span<const int> labels, double min_high_fraction) {
    SignalStatus st;
    st.signal = signal;
    st.n = labels.size();
    st.n_high = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    st.high_fraction = high_fraction(labels);
    if (st.n == 0) {
        st.reason = ExclusionReason::no_ratings;
    } else if (st.n_high == 0 || st.n_high == st.n) {
        st.reason = ExclusionReason::single_class;
    } else if (st.high_fraction < min_high_fraction) {
        st.reason = ExclusionReason::below_min_high_fraction;
    } else {
        st.reason = ExclusionReason::none;
        st.included = true;
        st.skewed = st.high_fraction < kSkewWarningFraction;
    }
    return st;
}

bool LabelPolicy::included(SignalId s) const {
    const auto it = signals.find(s);
    return it != signals.end() && it->second.included;
}

double LabelPolicy::threshold(SignalId s) const {
    const auto it = signals.find(s);
    if (it == signals.end() || it->second.n == 0) {
        throw ValidationError("no threshold fitted for " + s.key());
    }
    return it->second.threshold;
}

int LabelPolicy::label(const SignalRating& r) const { return r.value > threshold(r.signal) ? 1 : 0; }

std::vector<SignalId> LabelPolicy::included_signals() const {
    std::vector<SignalId> out;
    for (const auto& id : signal_catalog()) {
        if (included(id)) out.push_back(id);
    }
    return out;
}

void LabelPolicy::check_disjoint(const std::set<std::string>& held_out) const {
    for (const auto& v : held_out) {
        if (fitted_visits.count(v)) {
            throw ValidationError("label thresholds were fitted on held-out visit '" + v + "'");
        }
    }
}

LabelPolicy fit_label_policy(const std::vector<SignalRating>& train_ratings, double min_high_fraction) {
    LabelPolicy policy;
    policy.min_high_fraction = min_high_fraction;
    std::map<SignalId, std::vector<int>> values;
    for (const auto& r : train_ratings) {
        values[r.signal].push_back(r.value);
        policy.fitted_visits.insert(r.visit_id);
    }
    for (const auto& id : signal_catalog()) {
        const auto it = values.find(id);
        if (it == values.end()) {
            policy.signals[id] = assess_signal(id, {}, min_high_fraction);
            continue;
        }
        const double threshold = compute_threshold(it->second);
        const auto labels = binarize(it->second, threshold);
        auto status = assess_signal(id, labels, min_high_fraction);
        status.threshold = threshold;
        policy.signals[id] = status;
    }
    return policy;
}

void write_label_csv(std::ostream& out, const LabelPolicy& policy) {
    csv::write_row(out, {"signal", "role", "high_fraction", "included", "reason"});
    for (const auto& id : signal_catalog()) {
        const auto& st = policy.signals.at(id);
        std::string reason(to_string(st.reason));
        if (st.included && st.skewed) reason = "warning_high_fraction_below_0.10";
        csv::write_row(out, {std::string(to_string(id.signal)), std::string(to_string(id.role)),
                             fmt::format("{:.6f}", st.high_fraction), st.included ? "true" : "false", reason});
    }
}

void write_policy_json(std::ostream& out, const LabelPolicy& policy) {
    nlohmann::ordered_json j;
    j["min_high_fraction"] = policy.min_high_fraction;
    j["fitted_visits"] = policy.fitted_visits;
    auto sigs = nlohmann::ordered_json::array();
    for (const auto& id : signal_catalog()) {
        const auto& st = policy.signals.at(id);
        nlohmann::ordered_json s;
        s["signal"] = to_string(id.signal);
        s["role"] = to_string(id.role);
        s["n"] = st.n;
        s["n_high"] = st.n_high;
        s["threshold"] = st.threshold;
        s["high_fraction"] = st.high_fraction;
        s["included"] = st.included;
        s["reason"] = to_string(st.reason);
        s["skewed"] = st.skewed;
        sigs.push_back(std::move(s));
    }
    j["signals"] = std::move(sigs);
    out << j.dump(2) << '\n';
}

LabelPolicy read_policy_json(std::string_view content) {
    try {
        const auto j = nlohmann::json::parse(content);
        LabelPolicy p;
        p.min_high_fraction = j.at("min_high_fraction").get<double>();
        p.fitted_visits = j.at("fitted_visits").get<std::set<std::string>>();
        for (const auto& s : j.at("signals")) {
            SignalStatus st;
            st.signal = make_signal_id(s.at("signal").get<std::string>(), s.at("role").get<std::string>());
            st.n = s.at("n").get<std::size_t>();
            st.n_high = s.at("n_high").get<std::size_t>();
            st.threshold = s.at("threshold").get<double>();
            st.high_fraction = s.at("high_fraction").get<double>();
            st.included = s.at("included").get<bool>();
            st.reason = parse_exclusion_reason(s.at("reason").get<std::string>());
            st.skewed = s.at("skewed").get<bool>();
            p.signals[st.signal] = st;
        }
        for (const auto& id : signal_catalog()) {
            if (!p.signals.count(id)) throw ValidationError("label policy lacks " + id.key());
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed label policy: ") + e.what());
    }
}

}  // namespace socsig::labeling

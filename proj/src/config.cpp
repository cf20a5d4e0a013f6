#include "vinecast/config.hpp"

#include "vinecast/error.hpp"
#include "vinecast/io.hpp"

#include <algorithm>
#include <initializer_list>

namespace vinecast {

namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

MarginSpec margin(const json& j, const char* key, const MarginSpec& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return MarginSpec::parse(j.at(key).get<std::string>());
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("margins.") + key + ": " + e.what());
    }
}

void parse_transform(const json& j, RunConfig& cfg) {
    allow_keys(j, "transform", {"kind", "selection", "asset_order"});
    auto& t = cfg.pipeline.transform;
    const auto kind = get_or<std::string>(j, "kind", "pcv");
    if (kind == "cholesky") {
        t.kind = TransformKind::Cholesky;
        cfg.asset_order = get_or<std::vector<std::string>>(j, "asset_order", {});
        if (j.contains("selection")) throw Error(ErrorCode::ConfigError, "cholesky transform takes no selection");
        return;
    }
    if (kind != "pcv") throw Error(ErrorCode::ConfigError, "transform.kind must be pcv or cholesky");
    if (j.contains("asset_order")) throw Error(ErrorCode::ConfigError, "asset_order applies to cholesky only");
    t.kind = TransformKind::Pcv;
    if (!j.contains("selection")) return;
    const json& s = j.at("selection");
    allow_keys(s, "transform.selection", {"kind", "weights", "lambda", "partial_weights", "seed", "structure"});
    auto& sel = t.selection;
    const auto skind = get_or<std::string>(s, "kind", "mst");
    if (skind == "mst") {
        sel.kind = SelectionKind::Mst;
    } else if (skind == "cvine_min") {
        sel.kind = SelectionKind::CvineMin;
    } else if (skind == "random") {
        sel.kind = SelectionKind::Random;
    } else if (skind == "fixed") {
        sel.kind = SelectionKind::Fixed;
        if (!s.contains("structure")) throw Error(ErrorCode::ConfigError, "fixed selection needs a structure");
        try {
            sel.fixed = structure_from_json(s.at("structure"));
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, std::string("transform.selection.structure: ") + e.what());
        }
    } else {
        throw Error(ErrorCode::ConfigError, "unknown selection kind '" + skind + "'");
    }
    const auto weights = get_or<std::string>(s, "weights", "empirical");
    if (weights == "empirical") {
        if (s.contains("lambda")) throw Error(ErrorCode::ConfigError, "lambda applies to ewma weights only");
        sel.scheme = AveragingScheme::empirical();
    } else if (weights == "ewma") {
        try {
            sel.scheme = AveragingScheme::ewma(get_or<double>(s, "lambda", 0.97));
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, e.what());
        }
    } else {
        throw Error(ErrorCode::ConfigError, "weights must be empirical or ewma");
    }
    const auto partial = get_or<std::string>(s, "partial_weights", "from_average");
    if (partial == "from_average") {
        sel.source = PartialWeightSource::FromAverage;
    } else if (partial == "average_of_daily") {
        sel.source = PartialWeightSource::AverageOfDaily;
    } else {
        throw Error(ErrorCode::ConfigError, "partial_weights must be from_average or average_of_daily");
    }
    sel.seed = get_or<std::uint64_t>(s, "seed", 0);
}

void parse_margins(const json& j, RunConfig& cfg) {
    auto& m = cfg.pipeline.margins;
    if (j.contains("all")) {
        allow_keys(j, "margins", {"all"});
        m = MarginLadder::uniform(margin(j, "all", MarginSpec{}));
        return;
    }
    allow_keys(j, "margins", {"variances", "tree1", "tree2_3", "tree4_plus"});
    m.variances = margin(j, "variances", m.variances);
    m.tree1 = margin(j, "tree1", m.tree1);
    m.tree2_3 = margin(j, "tree2_3", m.tree2_3);
    m.tree4_plus = margin(j, "tree4_plus", m.tree4_plus);
}

void parse_dependence(const json& j, RunConfig& cfg) {
    allow_keys(j, "dependence", {"mode", "families", "dependent_subset", "test_level"});
    auto& dep = cfg.pipeline.dependence;
    const auto mode = get_or<std::string>(j, "mode", "full");
    if (mode == "independence") {
        dep.mode = DependenceMode::Independence;
    } else if (mode == "full") {
        dep.mode = DependenceMode::Full;
    } else if (mode == "structured") {
        dep.mode = DependenceMode::Structured;
    } else {
        throw Error(ErrorCode::ConfigError, "dependence.mode must be independence, full or structured");
    }
    const auto families = get_or<std::string>(j, "families", "mixed");
    if (families == "gaussian") {
        dep.families = FamilySet::GaussianOnly;
    } else if (families == "mixed") {
        dep.families = FamilySet::Mixed;
    } else {
        throw Error(ErrorCode::ConfigError, "dependence.families must be gaussian or mixed");
    }
    dep.dependent_subset = get_or<std::vector<int>>(j, "dependent_subset", {});
    dep.test_level = get_or<double>(j, "test_level", 0.05);
}

std::string mode_name(DependenceMode m) {
    switch (m) {
        case DependenceMode::Independence: return "independence";
        case DependenceMode::Full: return "full";
        case DependenceMode::Structured: return "structured";
    }
    return "full";
}

std::string selection_name(SelectionKind k) {
    switch (k) {
        case SelectionKind::Mst: return "mst";
        case SelectionKind::CvineMin: return "cvine_min";
        case SelectionKind::Random: return "random";
        case SelectionKind::Fixed: return "fixed";
    }
    return "mst";
}

}  // namespace

void RunConfig::resolve_assets(const std::vector<std::string>& assets) {
    auto& order = pipeline.transform.asset_order;
    order.clear();
    if (asset_order.empty()) return;
    if (asset_order.size() != assets.size()) {
        throw Error(ErrorCode::ConfigError, "asset_order must list every asset exactly once");
    }
    for (const auto& label : asset_order) {
        const auto it = std::find(assets.begin(), assets.end(), label);
        if (it == assets.end()) throw Error(ErrorCode::ConfigError, "unknown asset '" + label + "' in asset_order");
        order.push_back(static_cast<int>(it - assets.begin()));
    }
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(ErrorCode::ConfigError, "asset_order repeats an asset");
    }
}

RunConfig parse_run_config(const json& j) {
    RunConfig cfg;
    try {
        allow_keys(j, "config",
                   {"transform", "margins", "dependence", "n_replications", "seed", "bias_correction", "windows"});
        if (j.contains("transform")) parse_transform(j.at("transform"), cfg);
        if (j.contains("margins")) parse_margins(j.at("margins"), cfg);
        if (j.contains("dependence")) parse_dependence(j.at("dependence"), cfg);
        cfg.pipeline.n_replications = get_or<int>(j, "n_replications", cfg.pipeline.n_replications);
        cfg.pipeline.root_seed = get_or<std::uint64_t>(j, "seed", 0);
        if (j.contains("bias_correction")) {
            const json& b = j.at("bias_correction");
            if (b.is_string()) {
                if (b.get<std::string>() != "off") throw Error(ErrorCode::ConfigError, "bias_correction must be off");
            } else {
                allow_keys(b, "bias_correction", {"enabled", "s_days"});
                cfg.pipeline.bias.enabled = get_or<bool>(b, "enabled", true);
                cfg.pipeline.bias.s_days = get_or<int>(b, "s_days", 264);
            }
        }
        if (j.contains("windows")) {
            const json& w = j.at("windows");
            allow_keys(w, "windows", {"train_days", "test_days", "warmup_days"});
            cfg.windows.train_days = get_or<int>(w, "train_days", cfg.windows.train_days);
            cfg.windows.test_days = get_or<int>(w, "test_days", cfg.windows.test_days);
            cfg.windows.warmup_days = get_or<int>(w, "warmup_days", cfg.windows.warmup_days);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    cfg.pipeline.validate();
    cfg.windows.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& config) {
    const auto& p = config.pipeline;
    json t;
    if (p.transform.kind == TransformKind::Cholesky) {
        t = {{"kind", "cholesky"}, {"asset_order", config.asset_order}};
    } else {
        const auto& s = p.transform.selection;
        json sel = {{"kind", selection_name(s.kind)},
                    {"weights", s.scheme.kind == AveragingScheme::Kind::Ewma ? "ewma" : "empirical"},
                    {"partial_weights", s.source == PartialWeightSource::FromAverage ? "from_average"
                                                                                      : "average_of_daily"},
                    {"seed", s.seed}};
        if (s.scheme.kind == AveragingScheme::Kind::Ewma) sel["lambda"] = s.scheme.lambda;
        if (s.fixed) sel["structure"] = to_json(*s.fixed);
        t = {{"kind", "pcv"}, {"selection", sel}};
    }
    return {{"transform", t},
            {"margins",
             {{"variances", p.margins.variances.to_string()},
              {"tree1", p.margins.tree1.to_string()},
              {"tree2_3", p.margins.tree2_3.to_string()},
              {"tree4_plus", p.margins.tree4_plus.to_string()}}},
            {"dependence",
             {{"mode", mode_name(p.dependence.mode)},
              {"families", p.dependence.families == FamilySet::GaussianOnly ? "gaussian" : "mixed"},
              {"dependent_subset", p.dependence.dependent_subset},
              {"test_level", p.dependence.test_level}}},
            {"n_replications", p.n_replications},
            {"seed", p.root_seed},
            {"bias_correction", {{"enabled", p.bias.enabled}, {"s_days", p.bias.s_days}}},
            {"windows",
             {{"train_days", config.windows.train_days},
              {"test_days", config.windows.test_days},
              {"warmup_days", config.windows.warmup_days}}}};
}

}  // namespace vinecast

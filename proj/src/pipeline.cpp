#include "meshtrace/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "meshtrace/io_util.hpp"
#include "meshtrace/model.hpp"
#include "meshtrace/stats.hpp"

namespace meshtrace::cli {

using nlohmann::json;

namespace {

std::string meta_comment(const RunConfig& cfg) {
    return "# config=" + cfg.config_hash() + " seed=" + std::to_string(cfg.seed) + "\n";
}

json meta_object(const RunConfig& cfg) {
    return json{{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}};
}

void write_csv(const RunConfig& cfg, const std::string& name, const std::string& body) {
    io::write_file_atomic(cfg.out_dir + "/" + name, meta_comment(cfg) + body);
}

void write_json(const RunConfig& cfg, const std::string& name, json j) {
    j["meta"] = meta_object(cfg);
    io::write_file_atomic(cfg.out_dir + "/" + name, j.dump(2) + "\n");
}

std::string bool_str(bool b) {
    return b ? "true" : "false";
}

std::string opt_str(const std::optional<double>& v, int decimals = 6) {
    return v ? io::format_double(*v, decimals) : std::string();
}

std::string categories_str(const std::set<char>& categories) {
    std::string s;
    for (char c : categories) {
        if (!s.empty())
            s += ';';
        s += c;
    }
    return s;
}

std::unique_ptr<corpus::CorpusProvider> make_provider(const RunConfig& cfg,
                                                      const vocab::VocabularyDB& db,
                                                      corpus::Transport transport) {
    if (cfg.backend == "fixture")
        return std::make_unique<corpus::FixtureCorpus>(
            corpus::FixtureCorpus::load_file(cfg.corpus_path));

    corpus::LiveConfig live = cfg.live;
    live.apply_env_overrides();
    live.scan_ceiling_year = std::max(live.scan_ceiling_year, cfg.horizon_year);
    if (!transport)
        transport = corpus::make_httplib_transport(live.base_url);
    // The resolver owns a copy of the label map so the provider does not need
    // to track the vocabulary's lifetime.
    std::map<std::string, std::string> labels;
    for (const auto& [ui, term] : db.terms())
        labels.emplace(ui, term.label);
    auto resolver = [labels = std::move(labels)](const std::string& ui) {
        auto it = labels.find(ui);
        if (it == labels.end())
            throw std::runtime_error("live backend: no label for ui " + ui);
        return it->second;
    };
    return std::make_unique<corpus::LiveCorpus>(std::move(live), std::move(transport),
                                                std::move(resolver));
}

}  // namespace

PipelineData load_pipeline(const RunConfig& config, corpus::Transport transport) {
    config.validate();
    PipelineData data;
    data.db = vocab::VocabularyDB::load_files(config.vocabulary_path, config.new_terms_path);

    if (!data.db.new_terms_by_year().empty()) {
        const int max_cohort = data.db.new_terms_by_year().rbegin()->first;
        if (config.horizon_year < max_cohort)
            throw std::runtime_error("horizon_year " + std::to_string(config.horizon_year) +
                                     " precedes cohort year " + std::to_string(max_cohort));
    }

    data.provider = make_provider(config, data.db, std::move(transport));

    for (const auto& [year, uis] : data.db.new_terms_by_year()) {
        data.selection.emplace(year, vocab::select_terms(data.db, *data.provider, year));
        for (const auto& ui : data.selection.at(year).selected)
            data.selected_uis.push_back(ui);
    }
    std::sort(data.selected_uis.begin(), data.selected_uis.end());

    for (const auto& ui : data.selected_uis) {
        const vocab::TermRecord& term = data.db.at(ui);
        data.series.emplace(ui, corpus::yearly_major_counts(*data.provider, ui,
                                                            term.year_added,
                                                            config.horizon_year));
    }

    // Quartiles are assigned within each cohort, then pooled.
    for (const auto& [year, result] : data.selection) {
        if (result.selected.empty())
            continue;
        std::vector<std::pair<std::string, long>> cohort;
        cohort.reserve(result.selected.size());
        for (const auto& ui : result.selected)
            cohort.emplace_back(ui, data.series.at(ui).total());
        for (const auto& [ui, label] : trend::cohort_quartiles(cohort))
            data.quartiles.emplace(ui, label);
    }

    const profile::KeywordConfig keywords = config.effective_keywords();
    for (const auto& ui : data.selected_uis) {
        data.profiles.push_back(profile::build_profile(data.db.at(ui), data.db,
                                                       *data.provider, config.horizon_year,
                                                       keywords));
        data.labels[ui] = data.quartiles.at(ui).emerging;
    }
    return data;
}

namespace {

void emit_select(const PipelineData& data, const RunConfig& cfg) {
    std::string summary = "year,new_mesh,selected\n";
    for (const auto& [year, result] : data.selection) {
        std::string body = "ui,label,disposition,reason\n";
        for (const auto& ui : result.selected) {
            const vocab::TermRecord* term = data.db.find(ui);
            body += io::csv_row({ui, term ? term->label : "", "selected", ""});
        }
        for (const auto& [ui, reason] : result.excluded) {
            const vocab::TermRecord* term = data.db.find(ui);
            body += io::csv_row({ui, term ? term->label : "", "excluded",
                                 vocab::to_string(reason)});
        }
        write_csv(cfg, "selection_" + std::to_string(year) + ".csv", body);

        const size_t candidates = result.selected.size() + result.excluded.size();
        summary += io::csv_row({std::to_string(year), std::to_string(candidates),
                                std::to_string(result.selected.size())});
    }
    write_csv(cfg, "selection_summary.csv", summary);
}

void emit_counts(const PipelineData& data, const RunConfig& cfg) {
    std::string body = "ui,year,count\n";
    for (const auto& ui : data.selected_uis) {
        const corpus::PopularitySeries& s = data.series.at(ui);
        for (size_t i = 0; i < s.counts.size(); ++i)
            body += io::csv_row({ui, std::to_string(s.start_year + static_cast<int>(i)),
                                 std::to_string(s.counts[i])});
    }
    write_csv(cfg, "counts.csv", body);
}

void emit_profiles(const PipelineData& data, const RunConfig& cfg) {
    std::string body =
        "ui,categories,has_narrower,clinical_first_year,clinical_significance,pathogen,"
        "lag,lag_stage\n";
    for (const auto& p : data.profiles) {
        std::string clinical_year, lag, stage;
        if (p.clinical_first_year) {
            clinical_year = std::to_string(*p.clinical_first_year);
            const int l = profile::clinical_lag(p.year_added, *p.clinical_first_year);
            lag = std::to_string(l);
            stage = std::to_string(profile::lag_stage(l).stage);
        }
        body += io::csv_row({p.ui, categories_str(p.categories), bool_str(p.has_narrower),
                             clinical_year, bool_str(p.clinical_significance),
                             p.pathogen ? profile::to_string(*p.pathogen) : "", lag, stage});
    }
    write_csv(cfg, "profiles.csv", body);
}

// --- analyze ---------------------------------------------------------------

const std::vector<trend::TrendClass> kTrendOrder{
    trend::TrendClass::EmergedSustained, trend::TrendClass::EmergedNotSustained,
    trend::TrendClass::EmergedFluctuated, trend::TrendClass::NotYetEmerged};

std::string summary_row(const std::string& name, const stats::FiveNumberSummary& s) {
    return io::csv_row({name, io::format_double(s.mean, 4), io::format_double(s.min, 4),
                        io::format_double(s.q1, 4), io::format_double(s.median, 4),
                        io::format_double(s.q3, 4), io::format_double(s.max, 4)});
}

// Contingency counts into CSV, labels in the first column.
std::string table_csv(const stats::ContingencyTable& t, const std::string& corner) {
    std::vector<std::string> header{corner};
    header.insert(header.end(), t.col_labels.begin(), t.col_labels.end());
    std::string body = io::csv_row(header);
    for (size_t i = 0; i < t.rows(); ++i) {
        std::vector<std::string> row{t.row_labels[i]};
        for (long c : t.counts[i])
            row.push_back(std::to_string(c));
        body += io::csv_row(row);
    }
    return body;
}

// Keeps only the requested columns and prunes empty rows/columns so the
// chi-square preconditions hold.
stats::ContingencyTable restrict_table(const stats::ContingencyTable& t,
                                       const std::vector<char>& keep_cols) {
    std::set<std::string> wanted;
    for (char c : keep_cols)
        wanted.insert(std::string(1, c));

    stats::ContingencyTable filtered;
    std::vector<size_t> col_idx;
    for (size_t j = 0; j < t.cols(); ++j)
        if (wanted.count(t.col_labels[j]))
            col_idx.push_back(j);

    std::vector<long> col_totals(col_idx.size(), 0);
    std::vector<std::vector<long>> rows;
    std::vector<std::string> row_labels;
    for (size_t i = 0; i < t.rows(); ++i) {
        std::vector<long> row;
        long row_total = 0;
        for (size_t k = 0; k < col_idx.size(); ++k) {
            const long c = t.counts[i][col_idx[k]];
            row.push_back(c);
            row_total += c;
            col_totals[k] += c;
        }
        if (row_total > 0) {
            rows.push_back(std::move(row));
            row_labels.push_back(t.row_labels[i]);
        }
    }
    for (size_t k = col_idx.size(); k-- > 0;) {
        if (col_totals[k] > 0) {
            filtered.col_labels.insert(filtered.col_labels.begin(), t.col_labels[col_idx[k]]);
            continue;
        }
        for (auto& row : rows)
            row.erase(row.begin() + static_cast<long>(k));
    }
    filtered.row_labels = std::move(row_labels);
    filtered.counts = std::move(rows);
    return filtered;
}

void emit_table_with_test(const RunConfig& cfg, const std::string& stem,
                          const stats::ContingencyTable& full, const std::string& corner) {
    write_csv(cfg, stem + "_table.csv", table_csv(full, corner));

    const stats::ContingencyTable tested = restrict_table(full, cfg.test_categories);
    if (tested.rows() < 2 || tested.cols() < 2) {
        write_json(cfg, stem + "_test.json",
                   json{{"test", "chi_square_independence"},
                        {"skipped", "fewer than two non-empty rows or columns"}});
        return;
    }
    const stats::TestResult result = stats::chi_square_independence(tested);
    write_json(cfg, stem + "_test.json",
               json{{"test", "chi_square_independence"},
                    {"statistic", result.statistic},
                    {"df", result.df},
                    {"p_value", result.p_value}});

    const auto residuals = stats::pearson_residuals(tested);
    std::vector<std::string> header{corner};
    header.insert(header.end(), tested.col_labels.begin(), tested.col_labels.end());
    std::string body = io::csv_row(header);
    for (size_t i = 0; i < tested.rows(); ++i) {
        std::vector<std::string> row{tested.row_labels[i]};
        for (double r : residuals[i])
            row.push_back(io::format_double(r, 6));
        body += io::csv_row(row);
    }
    write_csv(cfg, stem + "_residuals.csv", body);
}

void emit_group_comparison(const RunConfig& cfg, const std::string& stem,
                           const std::vector<std::pair<std::string, std::vector<double>>>&
                               groups) {
    std::string body = "group,n,mean,min,q1,median,q3,max\n";
    std::vector<std::vector<double>> nonempty;
    for (const auto& [name, values] : groups) {
        if (values.empty())
            continue;
        const stats::FiveNumberSummary s = stats::describe(values);
        body += io::csv_row({name, std::to_string(values.size()),
                             io::format_double(s.mean, 4), io::format_double(s.min, 4),
                             io::format_double(s.q1, 4), io::format_double(s.median, 4),
                             io::format_double(s.q3, 4), io::format_double(s.max, 4)});
        nonempty.push_back(values);
    }
    write_csv(cfg, stem + "_groups.csv", body);

    size_t total = 0;
    for (const auto& g : nonempty)
        total += g.size();
    if (nonempty.size() < 2 || total < 3) {
        write_json(cfg, stem + "_test.json",
                   json{{"test", "kruskal_wallis"},
                        {"skipped", "fewer than two non-empty groups"}});
        return;
    }
    const stats::TestResult result = stats::kruskal_wallis(nonempty);
    write_json(cfg, stem + "_test.json",
               json{{"test", "kruskal_wallis"},
                    {"statistic", result.statistic},
                    {"df", result.df},
                    {"p_value", result.p_value}});
}

void emit_analyze(const PipelineData& data, const RunConfig& cfg) {
    // Popularity descriptives over all selected terms.
    std::vector<double> totals;
    std::vector<double> per_year;
    for (const auto& ui : data.selected_uis) {
        const trend::PopularitySummary s = trend::summarize(data.series.at(ui));
        totals.push_back(static_cast<double>(s.total));
        per_year.push_back(s.per_year);
    }
    std::string desc = "metric,mean,min,q1,median,q3,max\n";
    if (!totals.empty()) {
        desc += summary_row("articles_total", stats::describe(totals));
        desc += summary_row("articles_per_year", stats::describe(per_year));
    }
    write_csv(cfg, "descriptive.csv", desc);

    // Per-term trend table.
    std::map<std::string, trend::TrendClass> trend_class;
    std::string trend_body =
        "ui,label,year_added,total,per_year,trend_class,quartile,emerging\n";
    for (const auto& ui : data.selected_uis) {
        const corpus::PopularitySeries& series = data.series.at(ui);
        const trend::PopularitySummary s = trend::summarize(series);
        const trend::TrendClass c = trend::classify_trend(series, cfg.trend_params);
        trend_class.emplace(ui, c);
        const trend::QuartileLabel& q = data.quartiles.at(ui);
        trend_body += io::csv_row({ui, data.db.at(ui).label,
                                   std::to_string(data.db.at(ui).year_added),
                                   std::to_string(s.total), io::format_double(s.per_year, 4),
                                   trend::to_string(c), "Q" + std::to_string(q.quartile),
                                   bool_str(q.emerging)});
    }
    write_csv(cfg, "trend.csv", trend_body);

    std::vector<trend::TrendClass> class_list;
    for (const auto& [ui, c] : trend_class)
        class_list.push_back(c);
    const trend::TrendDistribution dist = trend::trend_distribution(class_list);
    std::string dist_body = "trend_class,count,percentage\n";
    for (trend::TrendClass c : kTrendOrder) {
        const double pct = dist.total() > 0 ? 100.0 * dist.of(c) / dist.total() : 0.0;
        dist_body += io::csv_row({trend::to_string(c), std::to_string(dist.of(c)),
                                  io::format_double(pct, 4)});
    }
    write_csv(cfg, "trend_distribution.csv", dist_body);

    // Category occurrence tables (one count per term-category pair).
    std::set<char> observed;
    for (const auto& p : data.profiles)
        observed.insert(p.categories.begin(), p.categories.end());
    std::vector<std::string> category_labels;
    for (char c : observed)
        category_labels.emplace_back(1, c);
    auto col_of = [&](char c) {
        return static_cast<size_t>(
            std::find(category_labels.begin(), category_labels.end(), std::string(1, c)) -
            category_labels.begin());
    };

    stats::ContingencyTable quartile_table;
    quartile_table.col_labels = category_labels;
    quartile_table.row_labels = {"Q1", "Q2", "Q3", "Q4"};
    quartile_table.counts.assign(4, std::vector<long>(category_labels.size(), 0));

    stats::ContingencyTable trend_table;
    trend_table.col_labels = category_labels;
    for (trend::TrendClass c : kTrendOrder)
        trend_table.row_labels.push_back(trend::to_string(c));
    trend_table.counts.assign(kTrendOrder.size(),
                              std::vector<long>(category_labels.size(), 0));

    for (const auto& p : data.profiles) {
        const int quartile = data.quartiles.at(p.ui).quartile;
        const trend::TrendClass c = trend_class.at(p.ui);
        const size_t trend_row = static_cast<size_t>(
            std::find(kTrendOrder.begin(), kTrendOrder.end(), c) - kTrendOrder.begin());
        for (char cat : p.categories) {
            ++quartile_table.counts[static_cast<size_t>(quartile - 1)][col_of(cat)];
            ++trend_table.counts[trend_row][col_of(cat)];
        }
    }
    emit_table_with_test(cfg, "category_quartile", quartile_table, "quartile");
    emit_table_with_test(cfg, "category_trend", trend_table, "trend_class");

    // Group comparisons on total popularity.
    std::vector<double> with_clinical, without_clinical;
    std::vector<double> with_narrower, without_narrower;
    std::map<profile::PathogenClass, std::vector<double>> by_pathogen;
    for (const auto& p : data.profiles) {
        const double total = static_cast<double>(data.series.at(p.ui).total());
        (p.clinical_significance ? with_clinical : without_clinical).push_back(total);
        (p.has_narrower ? with_narrower : without_narrower).push_back(total);
        if (p.pathogen)
            by_pathogen[*p.pathogen].push_back(total);
    }
    emit_group_comparison(cfg, "clinical",
                          {{"with_clinical", with_clinical},
                           {"without_clinical", without_clinical}});
    emit_group_comparison(cfg, "narrower",
                          {{"with_narrower", with_narrower},
                           {"without_narrower", without_narrower}});
    std::vector<std::pair<std::string, std::vector<double>>> pathogen_groups;
    for (profile::PathogenClass c :
         {profile::PathogenClass::PathogenHuman, profile::PathogenClass::PathogenOther,
          profile::PathogenClass::PathogenBoth, profile::PathogenClass::NonPathogen}) {
        auto it = by_pathogen.find(c);
        pathogen_groups.emplace_back(profile::to_string(c),
                                     it == by_pathogen.end() ? std::vector<double>{}
                                                             : it->second);
    }
    emit_group_comparison(cfg, "pathogen", pathogen_groups);
}

void emit_train(const PipelineData& data, const RunConfig& cfg) {
    const auto sweep = model::sweep_forecast(data.profiles, data.labels, cfg.forecast_lo,
                                             cfg.forecast_hi, cfg.k_folds, cfg.seed,
                                             cfg.features);
    std::string sweep_body = "M,accuracy,recall,precision,f_measure,csi\n";
    std::string curve_body = "M,csi\n";
    for (const auto& row : sweep) {
        sweep_body += io::csv_row({std::to_string(row.forecast_year),
                                   opt_str(row.metrics.accuracy), opt_str(row.metrics.recall),
                                   opt_str(row.metrics.precision),
                                   opt_str(row.metrics.f_measure), opt_str(row.metrics.csi)});
        curve_body += io::csv_row({std::to_string(row.forecast_year),
                                   opt_str(row.metrics.csi)});
    }
    write_csv(cfg, "sweep.csv", sweep_body);
    write_csv(cfg, "csi_curve.csv", curve_body);

    const model::FullFit fit = model::fit_full(data.profiles, data.labels, cfg.features);
    std::string fit_body = "variable,coeff,std_error,z,p,significance\n";
    json coeffs = json::array();
    for (size_t i = 0; i < fit.names.size(); ++i) {
        const double p = fit.model.p_values[i];
        fit_body += io::csv_row({fit.names[i], io::format_double(fit.model.coefficients[i], 6),
                                 io::format_double(fit.model.std_errors[i], 6),
                                 io::format_double(fit.model.z_values[i], 6),
                                 io::format_double(p, 6), model::significance_code(p)});
        coeffs.push_back(json{{"name", fit.names[i]},
                              {"coefficient", fit.model.coefficients[i]},
                              {"std_error", fit.model.std_errors[i]},
                              {"z", fit.model.z_values[i]},
                              {"p", p},
                              {"significance", model::significance_code(p)}});
    }
    write_csv(cfg, "full_fit.csv", fit_body);

    write_json(cfg, "model.json",
               json{{"coefficients", coeffs},
                    {"log_likelihood", fit.model.log_likelihood},
                    {"converged", fit.model.converged},
                    {"iterations", fit.model.iterations},
                    {"seed", cfg.seed},
                    {"config", json::parse(cfg.to_json_string())}});
}

void emit_lag(const PipelineData& data, const RunConfig& cfg) {
    std::map<int, long> histogram;
    std::map<int, long> stage_counts;
    long total = 0;
    for (const auto& p : data.profiles) {
        if (!p.clinical_first_year)
            continue;
        const int lag = profile::clinical_lag(p.year_added, *p.clinical_first_year);
        ++histogram[lag];
        ++stage_counts[profile::lag_stage(lag).stage];
        ++total;
    }

    static const std::pair<int, int> kBrackets[5] = {{-4, 0}, {1, 4}, {5, 8}, {9, 12}, {13, 17}};
    std::string stage_body = "stage,lag_from,lag_to,count,percentage,cumulative_percentage\n";
    long cumulative = 0;
    for (int stage = 1; stage <= 5; ++stage) {
        const long count = stage_counts.count(stage) ? stage_counts.at(stage) : 0;
        cumulative += count;
        const double pct = total > 0 ? 100.0 * count / total : 0.0;
        const double cum_pct = total > 0 ? 100.0 * cumulative / total : 0.0;
        stage_body += io::csv_row({std::to_string(stage),
                                   std::to_string(kBrackets[stage - 1].first),
                                   std::to_string(kBrackets[stage - 1].second),
                                   std::to_string(count), io::format_double(pct, 4),
                                   io::format_double(cum_pct, 4)});
    }
    write_csv(cfg, "lag_stages.csv", stage_body);

    std::string hist_body = "lag,count\n";
    for (const auto& [lag, count] : histogram)
        hist_body += io::csv_row({std::to_string(lag), std::to_string(count)});
    write_csv(cfg, "lag_histogram.csv", hist_body);
}

}  // namespace

void cmd_select(const RunConfig& config, corpus::Transport transport) {
    emit_select(load_pipeline(config, std::move(transport)), config);
}

void cmd_counts(const RunConfig& config, corpus::Transport transport) {
    emit_counts(load_pipeline(config, std::move(transport)), config);
}

void cmd_profile(const RunConfig& config, corpus::Transport transport) {
    emit_profiles(load_pipeline(config, std::move(transport)), config);
}

void cmd_analyze(const RunConfig& config, corpus::Transport transport) {
    emit_analyze(load_pipeline(config, std::move(transport)), config);
}

void cmd_train(const RunConfig& config, corpus::Transport transport) {
    emit_train(load_pipeline(config, std::move(transport)), config);
}

void cmd_lag(const RunConfig& config, corpus::Transport transport) {
    emit_lag(load_pipeline(config, std::move(transport)), config);
}

void cmd_all(const RunConfig& config, corpus::Transport transport) {
    const PipelineData data = load_pipeline(config, std::move(transport));
    emit_select(data, config);
    emit_counts(data, config);
    emit_profiles(data, config);
    emit_analyze(data, config);
    emit_train(data, config);
    emit_lag(data, config);
}

}  // namespace meshtrace::cli

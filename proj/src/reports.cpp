#include "topodim/reports.hpp"

#include <sstream>

#include "topodim/io.hpp"

namespace topodim {

ojson spec_json(const DescriptorSpec& spec) {
    return ojson{{"i", spec.dim},
                 {"alpha", spec.alpha},
                 {"averaged", spec.averaged},
                 {"include_zero_length", spec.include_zero_length}};
}

ojson descriptor_json(const DescriptorValue& value) {
    return ojson{{"value", value.value},
                 {"n_intervals", value.n_intervals},
                 {"spec", spec_json(value.spec)}};
}

ojson diagram_json(const PersistenceDiagram& diagram) {
    ojson intervals = ojson::array();
    for (int dim = 0; dim <= diagram.max_dim(); ++dim) {
        for (const PersistenceInterval& interval : diagram.intervals(dim)) {
            ojson entry{{"dim", interval.dim}, {"birth", interval.birth}};
            if (interval.infinite())
                entry["death"] = nullptr;
            else
                entry["death"] = interval.death;
            entry["zero_length"] = interval.zero_length();
            intervals.push_back(std::move(entry));
        }
    }
    return ojson{{"max_dim", diagram.max_dim()},
                 {"threshold", diagram.threshold()},
                 {"intervals", std::move(intervals)}};
}

ojson phdim_json(const PhDimEstimate& estimate) {
    ojson points = ojson::array();
    for (const auto& [x, y] : estimate.points)
        points.push_back(ojson::array({x, y}));
    return ojson{{"method", "phdim"},
                 {"i", estimate.dim},
                 {"alpha", estimate.alpha},
                 {"beta", estimate.beta},
                 {"dimension", estimate.dimension},
                 {"r_squared", estimate.r_squared},
                 {"points", std::move(points)},
                 {"warnings", estimate.warnings}};
}

ojson id_json(const IdEstimate& estimate) {
    ojson j{{"method", to_string(estimate.method)},
            {"value", estimate.value},
            {"points_used", estimate.points_used},
            {"points_dropped", estimate.points_dropped}};
    if (estimate.k > 0) j["k"] = estimate.k;
    if (!std::isnan(estimate.r_squared)) j["r_squared"] = estimate.r_squared;
    j["notes"] = estimate.notes;
    return j;
}

namespace {

std::string descriptor_column_name(const DescriptorSpec& spec) {
    std::string name = "E_i" + std::to_string(spec.dim) + "_a" +
                       format_double(spec.alpha);
    if (spec.averaged) name += "_avg";
    return name;
}

} // namespace

ojson profile_json(const LayerProfile& profile) {
    ojson layers = ojson::array();
    for (const LayerResult& layer : profile.layers) {
        ojson descriptors = ojson::array();
        for (const DescriptorValue& v : layer.descriptors)
            descriptors.push_back(descriptor_json(v));
        ojson entry{{"layer_index", layer.layer_index},
                    {"relative_depth", layer.relative_depth},
                    {"descriptors", std::move(descriptors)}};
        if (layer.phdim)
            entry["phdim"] = phdim_json(*layer.phdim);
        layers.push_back(std::move(entry));
    }

    ojson config{{"batch_size", profile.config.batch_size},
                 {"batches", profile.config.batches},
                 {"seed", profile.config.seed},
                 {"metric", to_string(profile.config.diagram.metric)}};
    return ojson{{"config", std::move(config)},
                 {"layers", std::move(layers)},
                 {"sources", profile.source_paths},
                 {"warnings", profile.warnings}};
}

ojson correlation_json(const GeneralizationReport& report) {
    ojson records = ojson::array();
    for (const ModelRecord& r : report.records) {
        records.push_back(
            ojson{{"model_id", r.model_id},
                  {"descriptor", r.last_layer_descriptor.value},
                  {"n_intervals", r.last_layer_descriptor.n_intervals},
                  {"test_accuracy", r.test_accuracy}});
    }
    const DescriptorSpec& spec =
        report.records.front().last_layer_descriptor.spec;
    return ojson{{"pearson_r", report.pearson},
                 {"trend",
                  ojson{{"slope", report.trend.slope},
                        {"intercept", report.trend.intercept}}},
                 {"weak_predictor", report.weak_predictor},
                 {"spec", spec_json(spec)},
                 {"records", std::move(records)}};
}

std::string diagram_csv(const PersistenceDiagram& diagram) {
    std::ostringstream out;
    out << "dim,birth,death,zero_length\n";
    for (int dim = 0; dim <= diagram.max_dim(); ++dim) {
        for (const PersistenceInterval& interval : diagram.intervals(dim)) {
            out << interval.dim << ',' << format_double(interval.birth) << ',';
            if (interval.infinite())
                out << "inf";
            else
                out << format_double(interval.death);
            out << ',' << (interval.zero_length() ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

std::string descriptor_csv(const DescriptorValue& value) {
    std::ostringstream out;
    out << "value,n_intervals,i,alpha,averaged,include_zero_length\n";
    out << format_double(value.value) << ',' << format_double(value.n_intervals)
        << ',' << value.spec.dim << ',' << format_double(value.spec.alpha)
        << ',' << (value.spec.averaged ? 1 : 0) << ','
        << (value.spec.include_zero_length ? 1 : 0) << '\n';
    return out.str();
}

std::string phdim_csv(const PhDimEstimate& estimate) {
    std::ostringstream out;
    out << "beta,dimension,alpha,i,r_squared\n";
    out << format_double(estimate.beta) << ','
        << format_double(estimate.dimension) << ','
        << format_double(estimate.alpha) << ',' << estimate.dim << ','
        << format_double(estimate.r_squared) << '\n';
    return out.str();
}

std::string id_csv(const IdEstimate& estimate) {
    std::ostringstream out;
    out << "method,value,points_used,points_dropped,k,r_squared\n";
    out << to_string(estimate.method) << ',' << format_double(estimate.value)
        << ',' << estimate.points_used << ',' << estimate.points_dropped << ','
        << estimate.k << ',';
    if (std::isnan(estimate.r_squared))
        out << "nan";
    else
        out << format_double(estimate.r_squared);
    out << '\n';
    return out.str();
}

std::string profile_csv(const LayerProfile& profile) {
    std::ostringstream out;
    out << "layer_index,relative_depth";
    if (!profile.layers.empty()) {
        for (const DescriptorValue& v : profile.layers.front().descriptors)
            out << ',' << descriptor_column_name(v.spec);
        if (profile.layers.front().phdim) out << ",phdim,phdim_r2";
    }
    out << '\n';
    for (const LayerResult& layer : profile.layers) {
        out << layer.layer_index << ','
            << format_double(layer.relative_depth);
        for (const DescriptorValue& v : layer.descriptors)
            out << ',' << format_double(v.value);
        if (layer.phdim)
            out << ',' << format_double(layer.phdim->dimension) << ','
                << format_double(layer.phdim->r_squared);
        out << '\n';
    }
    return out.str();
}

std::string correlation_csv(const GeneralizationReport& report) {
    std::ostringstream out;
    out << "# pearson_r=" << format_double(report.pearson) << '\n';
    out << "# trend_slope=" << format_double(report.trend.slope)
        << " trend_intercept=" << format_double(report.trend.intercept)
        << '\n';
    out << "# weak_predictor=" << (report.weak_predictor ? 1 : 0) << '\n';
    out << "model_id,descriptor,n_intervals,test_accuracy\n";
    for (const ModelRecord& r : report.records) {
        out << r.model_id << ',' << format_double(r.last_layer_descriptor.value)
            << ',' << format_double(r.last_layer_descriptor.n_intervals) << ','
            << format_double(r.test_accuracy) << '\n';
    }
    return out.str();
}

} // namespace topodim

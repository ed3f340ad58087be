// JSON and CSV renderings of the library's result types. Field order and
// number formatting are deterministic so identical inputs produce
// byte-identical documents.
#pragma once

#include <json.hpp>

#include "topodim/descriptors.hpp"
#include "topodim/dimension.hpp"
#include "topodim/persistence.hpp"
#include "topodim/pipeline.hpp"

namespace topodim {

using ojson = nlohmann::ordered_json;

ojson spec_json(const DescriptorSpec& spec);
ojson descriptor_json(const DescriptorValue& value);
// Infinite deaths serialize as null.
ojson diagram_json(const PersistenceDiagram& diagram);
ojson phdim_json(const PhDimEstimate& estimate);
ojson id_json(const IdEstimate& estimate);
ojson profile_json(const LayerProfile& profile);
ojson correlation_json(const GeneralizationReport& report);

// Flat tables. Infinite deaths render as "inf".
std::string diagram_csv(const PersistenceDiagram& diagram);
std::string descriptor_csv(const DescriptorValue& value);
std::string phdim_csv(const PhDimEstimate& estimate);
std::string id_csv(const IdEstimate& estimate);
// One row per layer: depth, each descriptor, PH_dim, r^2.
std::string profile_csv(const LayerProfile& profile);
// One row per model; the summary (pearson r, trend) rides in '#' comment
// lines above the header.
std::string correlation_csv(const GeneralizationReport& report);

} // namespace topodim

#pragma once

#include "json.hpp"
#include "stereocrawl/model.hpp"

namespace stereocrawl {

using ordered_json = nlohmann::ordered_json;

ordered_json crawl_config_to_json(const CrawlConfig& config);

/// Overlays the keys present in `j` onto `config`. Unknown keys and wrongly
/// typed values throw Error(InvalidConfig).
void apply_crawl_config_json(const nlohmann::json& j, CrawlConfig& config);

}  // namespace stereocrawl

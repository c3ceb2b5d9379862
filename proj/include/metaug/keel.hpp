#pragma once

#include <string>

#include "metaug/dataset.hpp"

namespace metaug {

// Parses a KEEL .dat file: @relation, @attribute lines (categorical value
// sets in braces, or real/integer with an optional [lo, hi] range), optional
// @inputs/@outputs, then @data with comma-separated rows. The rarer class
// token becomes label 1. Malformed input raises ParseError with the line
// number.
RawDataset load_keel_dat(const std::string& path);

// Same grammar from an in-memory string (fixtures and tests).
RawDataset parse_keel_dat(const std::string& text, const std::string& name);

}  // namespace metaug

///
/// \file io.hpp
///
/// Canonical JSON dataset and model files. Writers emit a fixed key order and
/// 17 significant digits so parse → serialize reproduces the input bytes.
///
#ifndef PARAFIT_IO_HPP
#define PARAFIT_IO_HPP

#include <optional>
#include <string>

#include <parafit/model.hpp>
#include <parafit/multiparam.hpp>

namespace parafit
{

/// printf %.17g; throws NonFinite for NaN/Inf.
std::string format_number(double x);

std::string dataset_to_json(const FrequencyResponseDataset& data);
std::string dataset_to_json(const FrequencyResponseDataset2& data);

struct DatasetFile
{
    std::string kind; ///< "1p" or "2p"
    std::optional<FrequencyResponseDataset> one;
    std::optional<FrequencyResponseDataset2> two;
};

/// Throws Parse on malformed text or a broken dataset invariant.
DatasetFile parse_dataset(const std::string& text);

std::string model_to_json(const ParametricModel& model);
std::string model_to_json(const CompressedParametricModel& model);
std::string model_to_json(const ParametricModel2& model);

struct ModelFile
{
    std::string kind; ///< "parametric", "compressed" or "parametric2"
    std::optional<ParametricModel> parametric;
    std::optional<CompressedParametricModel> compressed;
    std::optional<ParametricModel2> parametric2;
};

ModelFile parse_model(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace parafit

#endif /* PARAFIT_IO_HPP */

#include "thermodemon/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thermodemon::io
{

std::string format_number(double value)
{
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return {buf.data(), end};
}

CsvWriter::CsvWriter(std::string_view header)
{
    text_.append(header);
    text_.push_back('\n');
}

void CsvWriter::separator()
{
    if (row_open_) text_.push_back(',');
    row_open_ = true;
}

CsvWriter& CsvWriter::field(double value)
{
    separator();
    text_ += format_number(value);
    return *this;
}

CsvWriter& CsvWriter::field(long long value)
{
    separator();
    text_ += std::to_string(value);
    return *this;
}

CsvWriter& CsvWriter::field(unsigned long long value)
{
    separator();
    text_ += std::to_string(value);
    return *this;
}

CsvWriter& CsvWriter::field(bool value)
{
    separator();
    text_ += value ? "1" : "0";
    return *this;
}

CsvWriter& CsvWriter::field(std::string_view value)
{
    separator();
    text_.append(value);
    return *this;
}

CsvWriter& CsvWriter::end_row()
{
    text_.push_back('\n');
    row_open_ = false;
    return *this;
}

void write_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace thermodemon::io

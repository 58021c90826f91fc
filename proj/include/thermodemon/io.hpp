#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace thermodemon::io
{

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double value);

/// Minimal CSV builder: '.' decimal separator, '\n' line endings.
class CsvWriter
{
public:
    explicit CsvWriter(std::string_view header);

    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& field(unsigned long long value);
    CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
    CsvWriter& field(std::size_t value) { return field(static_cast<unsigned long long>(value)); }
    CsvWriter& field(bool value);
    CsvWriter& field(std::string_view value);
    CsvWriter& end_row();

    [[nodiscard]] const std::string& str() const { return text_; }

private:
    void separator();

    std::string text_;
    bool row_open_ = false;
};

void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

}  // namespace thermodemon::io

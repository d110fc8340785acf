#include <gtest/gtest.h>

#include "pathlens/csv.hpp"

using namespace pathlens;

TEST(Csv, ParsesQuotedFieldsAndCrlf) {
  const auto rec = detail::parse_csv_records("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\r\n");
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(rec[1], (std::vector<std::string>{"1", "2", "3"}));
}

TEST(Csv, SelectsTargetColumnAnywhere) {
  const Dataset ds = parse_csv("x1,y,x2\n1,10,4\n2,20,5\n3,30,7\n", "y");
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"x1", "x2"}));
  ASSERT_EQ(ds.rows(), 3);
  EXPECT_EQ(ds.target(2), 30.0);
  EXPECT_EQ(ds.features(2, 1), 7.0);
}

TEST(Csv, StripsByteOrderMark) {
  const Dataset ds = parse_csv("\xEF\xBB\xBFy,x\n1,2\n", "y");
  EXPECT_EQ(ds.feature_names.front(), "x");
}

TEST(Csv, ReportsBadCellsByRowAndColumn) {
  try {
    parse_csv("y,x\n1,2\n3,abc\n", "y");
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'x'"), std::string::npos) << msg;
  }
}

TEST(Csv, RejectsMalformedInput) {
  EXPECT_THROW(parse_csv("", "y"), InvalidInput);
  EXPECT_THROW(parse_csv("y,x\n", "y"), InvalidInput);
  EXPECT_THROW(parse_csv("a,x\n1,2\n", "y"), InvalidInput);
  EXPECT_THROW(parse_csv("y,x,x\n1,2,3\n", "y"), InvalidInput);
  EXPECT_THROW(parse_csv("y,x\n1,2,3\n", "y"), InvalidInput);
  EXPECT_THROW(parse_csv("y,x\n1,inf\n", "y"), InvalidInput);
  EXPECT_THROW(parse_csv("y,x\n1,\"2\n", "y"), InvalidInput);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", "y"), InvalidInput);
}

TEST(Csv, ParseRealAcceptsSurroundingSpaces) {
  double v = 0.0;
  EXPECT_TRUE(detail::parse_real(" -1.5e2 ", v));
  EXPECT_EQ(v, -150.0);
  EXPECT_FALSE(detail::parse_real("1.5x", v));
  EXPECT_FALSE(detail::parse_real("nan", v));
}

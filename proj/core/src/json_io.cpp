namespace qumode {}

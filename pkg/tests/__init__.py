# Test initialization file

# (criterion, passed, detail) rows, filled by test_acceptance and printed at the end of the run
RESULTS = []

from dataio.intake import parse_table
from validators import AucTableValidator, RecordValidator, Severity


def _rules(result):
    return sorted({i.rule_id for i in result.errors()})


def test_clean_table_passes():
    table = parse_table("sex,age,value\nf,young,1.0\nm,old,2\n")
    result = RecordValidator(["sex", "age"]).validate(table)
    assert result.is_ok
    assert result.as_text() == "No issues found."


def test_header_problems():
    table = parse_table("sex,sex,score\nf,f,1\n")
    result = RecordValidator(["sex", "age"]).validate(table)
    assert _rules(result) == ["header"]
    messages = [i.message for i in result.errors()]
    assert "Duplicate column 'sex'." in messages
    assert "Missing 'value' column." in messages
    assert "Missing attribute column 'age'." in messages


def test_row_problems_carry_line_numbers():
    text = "g,value,task\nA,1.0,t\nA,abc,t\nB,inf,t\nB,2.0\nA,3.0, \n"
    result = RecordValidator(["g"]).validate(parse_table(text))
    by_line = {(i.rule_id, i.line) for i in result.errors()}
    assert ("numeric_value", 3) in by_line
    assert ("numeric_value", 4) in by_line
    assert ("field_count", 5) in by_line
    assert ("empty_task", 6) in by_line
    assert all(i.severity is Severity.ERROR for i in result.issues)


def test_unknown_levels_are_listed():
    table = parse_table("g,value\nA,1\nC,2\n")
    result = RecordValidator(["g"], {"g": ["A", "B"]}).validate(table)
    (issue,) = result.errors()
    assert issue.rule_id == "known_levels"
    assert issue.line == 3
    assert "known levels: A, B" in issue.message
    assert result.as_lines()[0].startswith("[ERROR] known_levels (line 3)")


def test_header_only():
    result = RecordValidator(["g"]).validate(parse_table("g,value\n"))
    assert _rules(result) == ["has_rows"]


def test_auc_table_rules():
    text = "g,auc,n0,n1,task\nA,0.5,1,1,x\nA,0.6,2,2,x\nA,0.7,1,1,y\nB,nan,1.5,1,x\n"
    result = AucTableValidator(["g"]).validate(parse_table(text))
    by_line = {(i.rule_id, i.line) for i in result.errors()}
    assert by_line == {("unique_groups", 3), ("numeric_value", 5), ("count", 5)}
    assert AucTableValidator(["g"]).validate(parse_table("g,auc,n0,n1\nA,1,0,3\n")).is_ok

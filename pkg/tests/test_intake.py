import pytest
from numpy.testing import assert_allclose

from dataio.intake import auc_from_text, infer_attributes, parse_table, read_auc_table, read_records, records_from_text, records_to_text
from errors import DataError
from model.lattice import AttributeSpace
from model.metrics import auc_group_variance

CSV = "sex,age,value\nm,old,1.5\nf,young,0.5\n\nf,mid,2.0\n"


def test_inferred_levels_are_sorted():
    batch, space = records_from_text(CSV)
    assert space.names == ["sex", "age"]
    assert space.attributes[1].levels == ("mid", "old", "young")
    assert batch.classes.tolist() == [[2, 2], [1, 3], [1, 1]]
    assert batch.values.tolist() == [1.5, 0.5, 2.0]
    assert batch.tasks is None


def test_given_space_fixes_levels(space23):
    batch, space = records_from_text(CSV, space23)
    assert space is space23
    assert batch.classes.tolist() == [[2, 3], [1, 1], [1, 2]]


def test_unknown_label_with_space(space23):
    with pytest.raises(DataError) as info:
        records_from_text("sex,age,value\nx,young,1\n", space23)
    assert any("known levels: f, m" in line for line in info.value.issues)


def test_explicit_attribute_subset():
    text = "sex,age,site,value\nm,old,a,1\nf,old,b,2\n"
    batch, space = records_from_text(text, attributes=["sex"])
    assert space.names == ["sex"]
    assert batch.classes.tolist() == [[2], [1]]


def test_task_column():
    batch, _ = records_from_text("g,value,task\nA,1,t1\nB,2,t2\n")
    assert infer_attributes(parse_table("g,value,task\n")) == ["g"]
    assert batch.tasks.tolist() == ["t1", "t2"]


def test_bad_inputs(tmp_path):
    with pytest.raises(DataError):
        parse_table("")
    with pytest.raises(DataError):
        parse_table("g,value\nA\x00,1\n")
    with pytest.raises(DataError):
        read_records(tmp_path / "missing.csv")


def test_written_records_read_back(write_csv):
    batch, space = records_from_text("g,value,task\nA,1.25,x\nB,-3,y\n")
    path = write_csv("records.csv", records_to_text(batch, space))
    again, _ = read_records(path, space)
    assert again.classes.tolist() == batch.classes.tolist()
    assert again.values.tolist() == batch.values.tolist()
    assert again.tasks.tolist() == ["x", "y"]


def test_from_counts_labels():
    space = AttributeSpace.from_counts([2])
    batch, _ = records_from_text("a1,value\n2,0.1\n1,0.2\n", space)
    assert batch.classes.ravel().tolist() == [2, 1]


AUC_TABLE = "sex,age,auc,n0,n1,task\nf,young,0.8,2,3,a\nm,old,0.6,4,0,a\nf,young,0.7,1,1,b\nm,mid,0.9,3,3,b\n"


def test_auc_table_builds_precision_weighted_summaries(space23):
    summaries, space = auc_from_text(AUC_TABLE, space23)
    assert space is space23
    a, b = summaries
    assert [a.task_id, b.task_id] == ["a", "b"]
    assert a.missing.tolist() == [False, True, True, True, True, True]
    assert a.y[0] == pytest.approx(0.8)
    assert a.precision[0] == pytest.approx(1 / auc_group_variance(5, 2, 3))
    assert_allclose(b.precision[[0, 4]], [1 / auc_group_variance(2, 1, 1), 1 / auc_group_variance(6, 3, 3)])
    assert a.sigma2 == b.sigma2 == 1.0


def test_auc_table_problems(space23, write_csv):
    with pytest.raises(DataError) as info:
        auc_from_text("sex,age,auc,n0\nf,young,1.2,2\n", space23)
    assert any("Missing 'n1' column." in line for line in info.value.issues)
    assert any("outside [0.0, 1.0]" in line for line in info.value.issues)
    with pytest.raises(DataError) as info:
        auc_from_text("sex,age,auc,n0,n1\nf,young,0.5,2,-1\nf,young,0.5,2,2\n", space23)
    rules = {line.split()[1] for line in info.value.issues}
    assert rules == {"count", "unique_groups"}
    path = write_csv("auc.csv", "g,auc,n0,n1\nA,0.5,1,2\nB,0.75,2,2\n")
    summaries, space = read_auc_table(path)
    assert space.names == ["g"]
    assert summaries[0].y.tolist() == [0.5, 0.75]

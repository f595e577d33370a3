import json
import socket
from pathlib import Path

import pytest
from click.testing import CliRunner

from shepherd import canonical_tree_source
from shepherd.cli import cli
from shepherd.manifest import parse_manifest

DATA = Path(__file__).parent / "data"
NOW = "2026-03-01T12:00:00Z"


@pytest.fixture
def runner():
    return CliRunner()


def write_inputs(tmp_path, answers, fields):
    answers_file = tmp_path / "answers.json"
    fields_file = tmp_path / "fields.json"
    answers_file.write_text(json.dumps(answers), encoding="utf-8")
    fields_file.write_text(json.dumps(fields), encoding="utf-8")
    return str(answers_file), str(fields_file)


def run_cli(runner, tmp_path, answers, fields, out_name="m.json", extra=()):
    answers_file, fields_file = write_inputs(tmp_path, answers, fields)
    out = tmp_path / out_name
    result = runner.invoke(
        cli,
        [
            "run",
            "--answers",
            answers_file,
            "--fields",
            fields_file,
            "--out",
            str(out),
            "--now",
            NOW,
            *extra,
        ],
    )
    return result, out


class TestRun:
    def test_pre_link_path(self, runner, tmp_path):
        result, out = run_cli(
            runner,
            tmp_path,
            ["yes", "no", "yes"],
            {"preprocessed_url": "https://example.org/d.csv"},
        )
        assert result.exit_code == 0, result.output
        manifest = parse_manifest(out.read_text(encoding="utf-8"))
        assert manifest.outcome == "L_PRE_LINK"
        assert manifest.created_utc == NOW

    def test_access_partial_path(self, runner, tmp_path):
        result, out = run_cli(
            runner,
            tmp_path,
            ["no", "yes", "no"],
            {
                "accessible_information": "aggregate tables only",
                "access_procedure": "on-site terminal, request in writing",
            },
        )
        assert result.exit_code == 0
        assert parse_manifest(out.read_text(encoding="utf-8")).outcome == "L_ACCESS_PARTIAL"

    def test_unknown_answer_exits_1(self, runner, tmp_path):
        result, _ = run_cli(runner, tmp_path, ["yes", "maybe"], {})
        assert result.exit_code == 1
        assert "E_UNKNOWN_ANSWER" in result.output

    def test_missing_required_field_exits_1(self, runner, tmp_path):
        result, _ = run_cli(runner, tmp_path, ["no", "no"], {})
        assert result.exit_code == 1
        assert "E_INCOMPLETE" in result.output

    def test_unreadable_answers_exits_3(self, runner, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            cli,
            ["run", "--answers", str(tmp_path / "gone.json"), "--fields",
             str(tmp_path / "gone2.json"), "--out", str(out)],
        )
        assert result.exit_code == 3

    def test_invalid_json_exits_3(self, runner, tmp_path):
        answers_file = tmp_path / "answers.json"
        answers_file.write_text("[not json", encoding="utf-8")
        fields_file = tmp_path / "fields.json"
        fields_file.write_text("{}", encoding="utf-8")
        result = runner.invoke(
            cli,
            ["run", "--answers", str(answers_file), "--fields", str(fields_file),
             "--out", str(tmp_path / "m.json")],
        )
        assert result.exit_code == 3

    def test_keyvalue_field_from_json(self, runner, tmp_path):
        result, out = run_cli(
            runner,
            tmp_path,
            ["yes", "yes", "yes", "tool", "no"],
            {
                "raw_url": "https://example.org/raw.csv",
                "tool_name": "cleaner",
                "tool_version": "2.1",
                "tool_config": {"normalize": "true", "bins": "10"},
            },
        )
        assert result.exit_code == 0, result.output
        manifest = parse_manifest(out.read_text(encoding="utf-8"))
        assert manifest.outcome == "L_RAW_TOOL_PRIVATE"
        assert manifest.fields["tool_config"] == {"bins": "10", "normalize": "true"}


class TestAsk:
    def test_no_no_flow(self, runner, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            cli,
            ["ask", "--out", str(out), "--now", NOW],
            input="no\nno\nregulated data\n",
        )
        assert result.exit_code == 0, result.output
        manifest = parse_manifest(out.read_text(encoding="utf-8"))
        assert manifest.outcome == "L_NOT_RETRIEVABLE"
        assert manifest.fields["reason"] == "regulated data"

    def test_script_flow_with_skipped_optional(self, runner, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            cli,
            ["ask", "--out", str(out), "--now", NOW],
            input="yes\nyes\nyes\nscript\nhttps://example.org/raw.csv\nscripts/prep.py\n\n",
        )
        assert result.exit_code == 0, result.output
        manifest = parse_manifest(out.read_text(encoding="utf-8"))
        assert manifest.outcome == "L_RAW_SCRIPT"
        assert manifest.fields["script_ref"] == "scripts/prep.py"
        assert "script_sha256" not in manifest.fields

    def test_answers_accepted_by_index(self, runner, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            cli,
            ["ask", "--out", str(out), "--now", NOW],
            input="2\n2\n2\nsome tables\nby request\n",
        )
        assert result.exit_code == 0, result.output
        assert parse_manifest(out.read_text(encoding="utf-8")).outcome == "L_ACCESS_PARTIAL"

    def test_back_at_first_question(self, runner, tmp_path):
        result = runner.invoke(
            cli,
            ["ask", "--out", str(tmp_path / "m.json")],
            input="back\nquit\n",
        )
        assert "already at the first question" in result.output
        assert result.exit_code == 130

    def test_back_after_answer_revisits_question(self, runner, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            cli,
            ["ask", "--out", str(out), "--now", NOW],
            input="no\nback\nno\nno\nregulated\n",
        )
        assert result.exit_code == 0, result.output
        manifest = parse_manifest(out.read_text(encoding="utf-8"))
        assert manifest.path == (("Q_SHAREABLE", "no"), ("Q_OTHER_ACCESS", "no"))

    def test_invalid_url_reprompted(self, runner, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            cli,
            ["ask", "--out", str(out), "--now", NOW],
            input="yes\nno\nyes\nnot a url\nhttps://example.org/d.csv\n",
        )
        assert result.exit_code == 0, result.output
        assert parse_manifest(out.read_text(encoding="utf-8")).outcome == "L_PRE_LINK"

    def test_eof_aborts_130(self, runner, tmp_path):
        result = runner.invoke(cli, ["ask", "--out", str(tmp_path / "m.json")], input="")
        assert result.exit_code == 130

    def test_matches_run_byte_for_byte(self, runner, tmp_path):
        ask_out = tmp_path / "ask.json"
        result = runner.invoke(
            cli,
            ["ask", "--out", str(ask_out), "--now", NOW],
            input="no\nno\nregulated data\n",
        )
        assert result.exit_code == 0
        run_result, run_out = run_cli(
            runner, tmp_path, ["no", "no"], {"reason": "regulated data"}
        )
        assert run_result.exit_code == 0
        assert ask_out.read_bytes() == run_out.read_bytes()


class TestValidate:
    def make_manifest(self, runner, tmp_path, answers, fields):
        result, out = run_cli(runner, tmp_path, answers, fields)
        assert result.exit_code == 0
        return out

    def test_clean_manifest_ok(self, runner, tmp_path):
        out = self.make_manifest(runner, tmp_path, ["no", "no"], {"reason": "regulated"})
        result = runner.invoke(cli, ["validate", str(out)])
        assert result.exit_code == 0
        assert "OK" in result.output

    def test_missing_field_reported(self, runner, tmp_path):
        out = self.make_manifest(runner, tmp_path, ["no", "no"], {"reason": "regulated"})
        text = out.read_text(encoding="utf-8").replace(
            '"reason": "regulated"', ""
        ).replace('"fields": {\n    \n  }', '"fields": {}')
        out.write_text(text, encoding="utf-8")
        result = runner.invoke(cli, ["validate", str(out)])
        assert result.exit_code == 1
        lines = [l for l in result.output.splitlines() if "E_MISSING_FIELD" in l]
        assert len(lines) == 1

    def test_live_dead_link(self, runner, tmp_path, stub_server):
        out = self.make_manifest(
            runner,
            tmp_path,
            ["yes", "no", "yes"],
            {"preprocessed_url": f"{stub_server}/missing"},
        )
        result = runner.invoke(cli, ["validate", str(out), "--live", "--timeout", "2000"])
        assert result.exit_code == 1
        assert "E_LINK_DEAD" in result.output

    def test_strict_fails_on_warning(self, runner, tmp_path, stub_server):
        out = self.make_manifest(
            runner,
            tmp_path,
            ["yes", "no", "yes"],
            {"preprocessed_url": f"{stub_server}/slow"},
        )
        relaxed = runner.invoke(cli, ["validate", str(out), "--live", "--timeout", "300"])
        assert relaxed.exit_code == 0
        assert "W_LINK_TIMEOUT" in relaxed.output
        strict = runner.invoke(
            cli, ["validate", str(out), "--live", "--timeout", "300", "--strict"]
        )
        assert strict.exit_code == 1

    def test_checksums_relative_to_manifest_dir(self, runner, tmp_path):
        (tmp_path / "prep.py").write_text("x = 1\n", encoding="utf-8")
        out = self.make_manifest(
            runner,
            tmp_path,
            ["yes", "yes", "yes", "script"],
            {
                "raw_url": "https://example.org/raw.csv",
                "script_ref": "prep.py",
            },
        )
        result = runner.invoke(cli, ["validate", str(out), "--checksums"])
        assert result.exit_code == 0, result.output

    def test_json_format(self, runner, tmp_path):
        out = self.make_manifest(runner, tmp_path, ["no", "no"], {"reason": "regulated"})
        result = runner.invoke(cli, ["validate", str(out), "--format", "json"])
        body = json.loads(result.output)
        assert body["clean"] is True

    def test_malformed_manifest_exits_3(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops", encoding="utf-8")
        result = runner.invoke(cli, ["validate", str(bad)])
        assert result.exit_code == 3


class TestTreeTools:
    @pytest.fixture
    def canonical_file(self, tmp_path):
        target = tmp_path / "canonical.tree"
        target.write_text(canonical_tree_source(), encoding="utf-8")
        return str(target)

    def test_check_clean(self, runner, canonical_file):
        result = runner.invoke(cli, ["tree", "check", canonical_file])
        assert result.exit_code == 0
        assert "OK" in result.output

    def test_check_cycle_exits_1(self, runner):
        result = runner.invoke(cli, ["tree", "check", str(DATA / "mutant_cycle.tree")])
        assert result.exit_code == 1
        assert "E_CYCLE" in result.output

    def test_check_syntax_error_exits_3(self, runner):
        result = runner.invoke(cli, ["tree", "check", str(DATA / "mutant_syntax.tree")])
        assert result.exit_code == 3

    def test_render_counts(self, runner, canonical_file):
        result = runner.invoke(cli, ["tree", "render", canonical_file])
        assert result.exit_code == 0
        assert result.output.count("shape=diamond") == 8
        assert result.output.count("shape=box") == 10

    def test_render_to_file(self, runner, canonical_file, tmp_path):
        out = tmp_path / "tree.dot"
        result = runner.invoke(
            cli, ["tree", "render", canonical_file, "--out", str(out)]
        )
        assert result.exit_code == 0
        assert out.read_text(encoding="utf-8").startswith("digraph")

    def test_paths_lists_ten(self, runner, canonical_file):
        result = runner.invoke(cli, ["tree", "paths", canonical_file])
        lines = [line for line in result.output.splitlines() if line]
        assert len(lines) == 10
        assert lines[0] == "yes,no,yes -> L_PRE_LINK"
        assert all(" -> " in line for line in lines)

    def test_unknown_render_format_is_usage_error(self, runner, canonical_file):
        result = runner.invoke(
            cli, ["tree", "render", canonical_file, "--format", "svg"]
        )
        assert result.exit_code == 2


class TestServe:
    def test_occupied_port_exits_3(self, runner):
        placeholder = socket.socket()
        placeholder.bind(("127.0.0.1", 0))
        port = placeholder.getsockname()[1]
        try:
            result = runner.invoke(cli, ["serve", "--addr", f"127.0.0.1:{port}"])
            assert result.exit_code == 3
            assert "cannot bind" in result.output
        finally:
            placeholder.close()

    def test_bad_addr_is_usage_error(self, runner):
        result = runner.invoke(cli, ["serve", "--addr", "nonsense"])
        assert result.exit_code == 2

    def test_bad_now_is_usage_error(self, runner):
        result = runner.invoke(cli, ["serve", "--now", "noonish"])
        assert result.exit_code == 2


class TestUsage:
    def test_unknown_option_exits_2(self, runner):
        result = runner.invoke(cli, ["run", "--bogus"])
        assert result.exit_code == 2

    def test_bad_now_exits_2(self, runner, tmp_path):
        answers_file, fields_file = write_inputs(tmp_path, ["no", "no"], {})
        result = runner.invoke(
            cli,
            ["run", "--answers", answers_file, "--fields", fields_file,
             "--out", str(tmp_path / "m.json"), "--now", "yesterday"],
        )
        assert result.exit_code == 2

    def test_unparsable_tree_file_exits_3(self, runner, tmp_path):
        bad = tmp_path / "bad.tree"
        bad.write_text("tree tree tree", encoding="utf-8")
        result = runner.invoke(cli, ["tree", "paths", str(bad)])
        assert result.exit_code == 3

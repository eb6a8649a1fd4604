"""Bundled synthetic documentation and generated test corpora.

``SYNTHETIC_PAGES`` describes a small product manual (20 pages) whose task
pages point at their prerequisites through in-text links, rendered to
Sphinx-shaped HTML by :func:`render_page`. :func:`planted_link_corpus`
and :func:`random_corpus` generate corpora for retrieval experiments.
"""
from __future__ import annotations

import html
import random
import re
from dataclasses import dataclass
from pathlib import Path

from .bench import BenchmarkCase, write_suite
from .ingest import SourceDocument

BASE_URL = "https://docs.quarry.example/v1/"

_LINK = re.compile(r"\[([^\]]+)\]\(([^)]+)\)")

# (path, title, intro paragraphs, [(anchor, heading, paragraphs), ...])
# Links use [label](relative-target) markup.
SYNTHETIC_PAGES = [
    ("platform/index.html", "Quarry Platform", [
        "Quarry Platform is a data management and decision intelligence suite. It is made of "
        "two integrated components: [Quarry Factory](../factory/index.html) for building data "
        "flows and [Quarry Studio](../studio/index.html) for interactive dashboards.",
    ], [
        ("platform-overview", "Platform overview", [
            "Every Quarry installation runs a central engine that executes flows, stores "
            "datasets and serves dashboards. Users reach the engine through the desktop "
            "client or the web client on port 8443.",
            "If some concepts are not clear for you please refer to the "
            "[architecture section](architecture.html#engine) before continuing with the "
            "tutorials.",
        ]),
        ("editions", "Editions", [
            "Quarry ships in a Community edition limited to two concurrent flows and an "
            "Enterprise edition without limits. Enterprise features require an active "
            "[license key](../install/license.html#license-keys).",
        ]),
    ]),
    ("platform/architecture.html", "Architecture", [
        "This page describes how the Quarry services cooperate.",
    ], [
        ("engine", "Engine", [
            "The engine is a Java service that schedules tasks on worker processes. Each "
            "worker executes one task at a time and reports progress to the engine every "
            "five seconds.",
            "The engine keeps its state in an embedded PostgreSQL database stored under "
            "the data directory. The data directory must be backed up regularly, see "
            "[backup procedures](../admin/backup.html#backup-procedures).",
        ]),
        ("workers", "Workers", [
            "The number of workers defaults to the number of CPU cores minus one. You can "
            "change it with the workers.count property in quarry.conf. More workers need "
            "more memory, as described in [hardware requirements](../install/requirements.html#hardware).",
        ]),
    ]),
    ("install/requirements.html", "System requirements", [
        "Check these requirements before installing Quarry on any machine.",
    ], [
        ("hardware", "Hardware", [
            "Quarry requires at least 16 GB of RAM and 4 CPU cores. Plan an additional 2 GB "
            "of RAM for every extra worker. The data directory needs 50 GB of free disk "
            "space on an SSD.",
        ]),
        ("operating-systems", "Supported operating systems", [
            "Quarry runs on Ubuntu 22.04, Red Hat Enterprise Linux 9 and Windows Server "
            "2022. macOS is supported for the desktop client only.",
        ]),
        ("java-runtime", "Java runtime", [
            "The engine needs a 64-bit Java 17 runtime. The installer bundles Eclipse "
            "Temurin 17, so a separate Java installation is only needed for custom "
            "deployments.",
        ]),
    ]),
    ("install/linux.html", "Installing on Linux", [
        "Before you start, verify the [hardware requirements](requirements.html#hardware) and "
        "make sure your distribution is listed among the "
        "[supported operating systems](requirements.html#operating-systems).",
    ], [
        ("linux-package", "Installing the package", [
            "Download the quarry-server package from the customer portal. On Ubuntu run "
            "sudo apt install ./quarry-server.deb and on Red Hat run sudo dnf install "
            "./quarry-server.rpm. The package creates a quarry system user and installs "
            "the service under /opt/quarry.",
            "Start the service with sudo systemctl enable --now quarry. The first start "
            "initialises the data directory in /var/lib/quarry and can take a few minutes. "
            "The service listens on port 8443 once initialisation is complete.",
            "After the service is running, open the web client, sign in with the admin "
            "account created during installation and change its password immediately. "
            "Then activate your [license](license.html#online-activation) to unlock "
            "Enterprise features.",
        ]),
        ("linux-firewall", "Firewall configuration", [
            "Open TCP port 8443 for clients and TCP port 8444 for workers running on "
            "other hosts. On Ubuntu use sudo ufw allow 8443/tcp. On Red Hat use "
            "firewall-cmd --add-port=8443/tcp --permanent.",
        ]),
    ]),
    ("install/windows.html", "Installing on Windows", [
        "Before you start, verify the [hardware requirements](requirements.html#hardware).",
    ], [
        ("windows-installer", "Running the installer", [
            "Run QuarrySetup.exe as an administrator and follow the wizard. Choose the "
            "installation folder and the data directory; the data directory should be on "
            "an SSD. The wizard registers Quarry as a Windows service that starts "
            "automatically.",
            "When the wizard finishes, open the web client at https://localhost:8443 and "
            "activate your [license](license.html#offline-activation) if the server has "
            "no internet access.",
        ]),
    ]),
    ("install/license.html", "License activation", [
        "Quarry Enterprise features are unlocked by activating a license key.",
    ], [
        ("license-keys", "License keys", [
            "A license key is a 25-character code delivered by email after purchase. Each "
            "key is bound to one server and covers a fixed number of named users.",
        ]),
        ("online-activation", "Online activation", [
            "Open Settings, then License, paste the license key and click Activate. The "
            "server contacts the license service over HTTPS on port 443 and activation "
            "completes within a minute.",
        ]),
        ("offline-activation", "Offline activation", [
            "On servers without internet access, click Generate request to export a "
            "request file. Upload the request file to the customer portal from another "
            "machine, download the response file and import it in Settings, then License.",
        ]),
    ]),
    ("factory/index.html", "Quarry Factory", [
        "Quarry Factory is the processing engine of the platform. It lets you import data, "
        "transform it, apply business rules and export results by composing "
        "[flows](flows.html#creating-flows) out of tasks.",
    ], [
        ("factory-tasks", "Tasks", [
            "A task is a single processing step, such as an import, a filter or a rule "
            "evaluation. Tasks are connected by links that carry datasets from one task "
            "to the next.",
        ]),
    ]),
    ("factory/flows.html", "Flows", [
        "Flows are the main building block of Quarry Factory.",
    ], [
        ("projects", "Projects", [
            "Every flow belongs to a project. Create a project from the Factory home page "
            "with New project, give it a unique name and choose who can access it. Only "
            "users with the Designer role can create projects, see "
            "[roles](../admin/users.html#roles).",
        ]),
        ("creating-flows", "Creating flows", [
            "To create a flow you first need a [project](#projects). Open the project, "
            "click New flow and drag tasks from the task panel onto the canvas. Connect "
            "the output port of each task to the input port of the next one.",
            "Run the flow with the Play button. Quarry executes tasks in dependency order "
            "and marks each task green when it completes or red when it fails.",
        ]),
        ("flow-variables", "Flow variables", [
            "Flow variables hold values such as dates or thresholds that tasks can read. "
            "Define them in the Variables tab of the flow and reference them with the "
            "$name syntax inside task parameters.",
        ]),
    ]),
    ("factory/import-data.html", "Importing data", [
        "Import tasks bring external data into a flow as a dataset.",
    ], [
        ("csv-import", "Importing CSV files", [
            "Add a CSV Import task to the flow and select the file. Quarry detects the "
            "delimiter and the encoding automatically; you can override both in the task "
            "options. Files larger than 2 GB should be split before import.",
        ]),
        ("database-import", "Importing from databases", [
            "A Database Import task reads a table or the result of a SQL query. It needs "
            "an existing [data connection](connections.html#database-connections) with "
            "valid credentials. Select the connection, then the table or write the query "
            "and press Preview to check the first rows.",
        ]),
    ]),
    ("factory/connections.html", "Data connections", [
        "Connections store the location and credentials of external data sources.",
    ], [
        ("database-connections", "Database connections", [
            "Create a connection in Settings, then Connections, then New. Choose the "
            "driver, enter host, port, database name, user and password, and press Test. "
            "Quarry ships drivers for PostgreSQL, MySQL, SQL Server and Oracle.",
            "Passwords are encrypted with the server key. Connections are shared with "
            "everyone who can access the project, so use a read-only database user.",
        ]),
        ("custom-drivers", "Custom JDBC drivers", [
            "Copy other JDBC drivers into /opt/quarry/drivers and restart the service. "
            "Custom drivers require the Java runtime described in "
            "[Java runtime](../install/requirements.html#java-runtime).",
        ]),
    ]),
    ("factory/transform.html", "Transforming data", [
        "Transformation tasks reshape datasets inside a flow.",
    ], [
        ("formulas", "Formulas", [
            "The Formula task adds a computed column. Formulas use spreadsheet syntax, for "
            "example IF(amount > 100, \"large\", \"small\"), and can reference flow "
            "variables with $name.",
        ]),
        ("filters", "Filtering rows", [
            "The Filter task keeps rows that satisfy a condition. Conditions combine "
            "column comparisons with AND and OR. Rows that fail the condition can be sent "
            "to a second output for inspection.",
        ]),
        ("joins", "Joining datasets", [
            "The Join task merges two datasets on one or more key columns. Inner, left "
            "and full joins are supported. Both inputs must come from tasks in the same "
            "[flow](flows.html#creating-flows).",
        ]),
    ]),
    ("factory/scheduling.html", "Scheduling flows", [
        "Scheduled flows run automatically without user interaction.",
    ], [
        ("schedules", "Creating a schedule", [
            "Only flows that completed at least one successful manual run can be "
            "scheduled; build and test the flow first as described in "
            "[creating flows](flows.html#creating-flows). Open the flow, click Schedule "
            "and choose a daily, weekly or cron expression trigger.",
            "Scheduling requires the Operator role on the project, see "
            "[roles](../admin/users.html#roles).",
        ]),
        ("notifications", "Failure notifications", [
            "Enable email notifications in the schedule options to receive a message "
            "when a scheduled run fails. The SMTP server is configured by an "
            "administrator in Settings, then Mail.",
        ]),
    ]),
    ("factory/rules.html", "Business rules", [
        "The rule engine applies if-then rules to every row of a dataset.",
    ], [
        ("rule-sets", "Rule sets", [
            "A Rule Set task evaluates an ordered list of rules. Each rule has a "
            "condition written like a [filter condition](transform.html#filters) and an "
            "action that sets a column value. The first matching rule wins.",
        ]),
        ("rule-validation", "Validating rules", [
            "Press Validate to detect overlapping or unreachable rules. Quarry lists the "
            "rows matched by each rule so you can check coverage before running the flow.",
        ]),
    ]),
    ("factory/export.html", "Exporting results", [
        "Export tasks write datasets to files or databases.",
    ], [
        ("file-export", "Exporting to files", [
            "The File Export task writes CSV, Excel or Parquet files into a folder on the "
            "server. The quarry system user needs write permission on that folder.",
        ]),
        ("database-export", "Exporting to databases", [
            "The Database Export task writes a dataset into a table through a "
            "[data connection](connections.html#database-connections). Choose append or "
            "replace mode; replace mode truncates the table first.",
        ]),
    ]),
    ("studio/index.html", "Quarry Studio", [
        "Quarry Studio is the front-end environment used to create interactive dashboards "
        "on top of datasets produced by [flows](../factory/flows.html#creating-flows).",
    ], [
        ("studio-workspace", "Workspace", [
            "The Studio workspace has a dataset panel on the left, the canvas in the "
            "middle and the properties panel on the right. Dashboards are saved inside "
            "the same project as the flows they read.",
        ]),
    ]),
    ("studio/dashboards.html", "Dashboards", [
        "Dashboards combine widgets that read Factory datasets.",
    ], [
        ("creating-dashboards", "Creating a dashboard", [
            "A dashboard needs a dataset published by a flow: open the flow, select the "
            "final task and click Publish dataset, as explained in "
            "[creating flows](../factory/flows.html#creating-flows). Then open Studio, "
            "click New dashboard and drag the dataset onto the canvas.",
            "Add [widgets](widgets.html#widget-types) from the toolbar and arrange them "
            "on the grid. Save the dashboard to share it with project members.",
        ]),
        ("sharing", "Sharing dashboards", [
            "Shared dashboards are visible to every user with the Viewer role on the "
            "project. Public links can be generated for read-only access without an "
            "account when the administrator enables them.",
        ]),
    ]),
    ("studio/widgets.html", "Widgets", [
        "Widgets display a dataset on a dashboard.",
    ], [
        ("widget-types", "Widget types", [
            "Quarry Studio offers tables, bar charts, line charts, maps and KPI cards. "
            "Every widget is bound to one dataset and refreshes when the dataset is "
            "published again.",
        ]),
        ("widget-styling", "Styling widgets", [
            "Use the properties panel to change colours, fonts and number formats. Styles "
            "can be saved as a theme and reused across dashboards.",
        ]),
    ]),
    ("studio/filters.html", "Dashboard filters", [
        "Filters let dashboard users narrow the data shown by widgets.",
    ], [
        ("filter-controls", "Filter controls", [
            "Add a dropdown, date range or slider control to the dashboard and bind it to "
            "a dataset column. All [widgets](widgets.html#widget-types) that read the same "
            "dataset react to the control.",
        ]),
    ]),
    ("admin/users.html", "Users and roles", [
        "Administrators manage accounts in Settings, then Users.",
    ], [
        ("user-accounts", "User accounts", [
            "Create an account with New user and enter the email address. The user "
            "receives an invitation link valid for 48 hours. Accounts can also be "
            "synchronised from LDAP.",
        ]),
        ("roles", "Roles", [
            "Quarry defines four roles per project: Viewer can open dashboards, Operator "
            "can run and schedule flows, Designer can create projects, flows and "
            "dashboards, and Owner can manage members. Roles are assigned in the project "
            "Members tab.",
        ]),
    ]),
    ("admin/backup.html", "Backup and restore", [
        "Regular backups protect flows, datasets and configuration.",
    ], [
        ("backup-procedures", "Backup procedures", [
            "Run quarry-admin backup --target /backups to write a consistent archive of "
            "the data directory while the service is running. Schedule the command daily "
            "with cron and keep at least seven archives.",
        ]),
        ("restore", "Restoring a backup", [
            "Stop the service, run quarry-admin restore --source <archive> and start the "
            "service again. Restoring replaces all projects, so warn users first.",
        ]),
    ]),
]

# (question, reference)
SYNTHETIC_SUITE = [
    ("How do I install Quarry on Linux?",
     "Check the hardware requirements first: at least 16 GB of RAM, 4 CPU cores and 50 GB of "
     "SSD space, on Ubuntu 22.04 or Red Hat Enterprise Linux 9. Install the quarry-server "
     "package with apt or dnf, start it with systemctl enable --now quarry, change the admin "
     "password and activate the license in Settings, then License."),
    ("How do I install Quarry on Windows?",
     "Make sure the machine has at least 16 GB of RAM, 4 CPU cores and an SSD. Run "
     "QuarrySetup.exe as administrator, choose the installation folder and data directory, "
     "then open https://localhost:8443 and activate the license, offline if the server has no "
     "internet access."),
    ("How much memory does Quarry need?",
     "Quarry requires at least 16 GB of RAM plus 2 GB for every extra worker."),
    ("How do I activate a license on a server without internet access?",
     "Use offline activation: click Generate request, upload the request file to the "
     "customer portal from another machine, download the response file and import it in "
     "Settings, then License."),
    ("How do I create a flow?",
     "First create a project from the Factory home page, which requires the Designer role. "
     "Then open the project, click New flow, drag tasks onto the canvas, connect their ports "
     "and run the flow with the Play button."),
    ("How do I import data from a database?",
     "Create a data connection in Settings, then Connections with the driver, host, port, "
     "database, user and password and test it. Then add a Database Import task, select the "
     "connection and the table or SQL query and press Preview."),
    ("How can I schedule a flow to run every day?",
     "The flow must have completed a successful manual run and you need the Operator role on "
     "the project. Open the flow, click Schedule and choose a daily trigger; enable email "
     "notifications to be told about failures."),
    ("How do I build a dashboard in Studio?",
     "Publish a dataset from the final task of a flow, then open Studio, click New dashboard, "
     "drag the dataset onto the canvas, add widgets such as tables, charts, maps or KPI cards "
     "and save the dashboard."),
    ("What roles exist in a Quarry project?",
     "There are four roles: Viewer opens dashboards, Operator runs and schedules flows, "
     "Designer creates projects, flows and dashboards, and Owner manages members."),
    ("How do I back up Quarry?",
     "Run quarry-admin backup --target /backups while the service runs, schedule it daily "
     "with cron and keep at least seven archives of the data directory."),
    ("How do I restore a backup?",
     "Stop the service, run quarry-admin restore --source with the archive, and start the "
     "service again; all projects are replaced."),
    ("How do I add a custom JDBC driver?",
     "Copy the JDBC driver into /opt/quarry/drivers and restart the service; custom drivers "
     "need the 64-bit Java 17 runtime."),
    ("How do business rules work in Quarry?",
     "A Rule Set task evaluates an ordered list of rules whose conditions are written like "
     "filter conditions combining comparisons with AND and OR; the first matching rule sets "
     "the column value. Validate detects overlapping rules."),
    ("How do I export results to a database table?",
     "Use a Database Export task with a data connection, choosing append or replace mode; "
     "replace truncates the table first."),
    ("Which ports must be open in the firewall?",
     "Port 8443 for clients and port 8444 for remote workers, plus outbound 443 for online "
     "license activation."),
    ("How do I add a filter control to a dashboard?",
     "Add a dropdown, date range or slider control and bind it to a dataset column; widgets "
     "reading that dataset react to it."),
    ("How many workers does the engine use and how do I change it?",
     "By default the number of CPU cores minus one; change workers.count in quarry.conf and "
     "plan 2 GB of extra RAM per additional worker."),
    ("How do I join two datasets?",
     "Use the Join task on one or more key columns with inner, left or full join; both inputs "
     "must come from tasks in the same flow."),
    ("What is the difference between the Community and Enterprise editions?",
     "Community allows two concurrent flows while Enterprise has no limits and requires an "
     "active license key bound to one server."),
    ("How do I use flow variables in a formula?",
     "Define the variable in the Variables tab of the flow and reference it with $name in "
     "the Formula task, which uses spreadsheet syntax."),
]


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def _render_text(text: str) -> str:
    out = []
    last = 0
    for match in _LINK.finditer(text):
        out.append(html.escape(text[last:match.start()], quote=False))
        out.append(f'<a class="reference internal" href="{html.escape(match.group(2))}">'
                   f"{html.escape(match.group(1), quote=False)}</a>")
        last = match.end()
    out.append(html.escape(text[last:], quote=False))
    return "".join(out)


def render_page(title: str, intro: list[str], sections) -> str:
    """Sphinx-style HTML: one top-level section with nested subsections."""
    page_anchor = _slug(title)
    parts = [
        "<!DOCTYPE html>",
        f"<html><head><meta charset=\"utf-8\"><title>{html.escape(title)} - Quarry "
        "documentation</title></head>",
        '<body><div class="document"><div class="body" role="main">',
        f'<section id="{page_anchor}">',
        f'<h1>{html.escape(title)}<a class="headerlink" href="#{page_anchor}" '
        'title="Link to this heading">¶</a></h1>',
    ]
    parts += [f"<p>{_render_text(p)}</p>" for p in intro]
    for anchor, heading, paragraphs in sections:
        parts.append(f'<section id="{anchor}">')
        parts.append(f'<h2>{html.escape(heading)}<a class="headerlink" href="#{anchor}" '
                     'title="Link to this heading">¶</a></h2>')
        parts += [f"<p>{_render_text(p)}</p>" for p in paragraphs]
        parts.append("</section>")
    parts += ["</section>", "</div></div></body></html>", ""]
    return "\n".join(parts)


def synthetic_documents(base_url: str = BASE_URL) -> list[SourceDocument]:
    base = base_url.rstrip("/") + "/"
    return [SourceDocument(base + path, render_page(title, intro, sections).encode("utf-8"))
            for path, title, intro, sections in SYNTHETIC_PAGES]


def synthetic_suite() -> list[BenchmarkCase]:
    return [BenchmarkCase(f"Q{i:02d}", q, r) for i, (q, r) in enumerate(SYNTHETIC_SUITE, start=1)]


def write_synthetic_corpus(directory) -> tuple[Path, Path]:
    """Materialise the bundled pages under ``directory/corpus`` plus ``suite.jsonl``."""
    directory = Path(directory)
    corpus_dir = directory / "corpus"
    for path, title, intro, sections in SYNTHETIC_PAGES:
        target = corpus_dir / path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(render_page(title, intro, sections), encoding="utf-8")
    suite_path = directory / "suite.jsonl"
    write_suite(synthetic_suite(), suite_path)
    return corpus_dir, suite_path


_SYLLABLES = ("ka", "lo", "mi", "ru", "ten", "vo", "zan", "pel", "dri", "sku", "bor", "qua",
              "fen", "xi", "gol", "wen", "tra", "ny", "sal", "obe")


def _pseudo_word(rng: random.Random, used: set[str]) -> str:
    while True:
        word = "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(3, 4)))
        if word not in used:
            used.add(word)
            return word


@dataclass(frozen=True)
class PlantedCase:
    query: str
    gold_url: str
    gold_anchor: str
    source_url: str


def planted_link_corpus(n_cases: int = 50, seed: int = 0, embedder=None,
                        base_url: str = "https://planted.example/docs/"):
    """Pages where each gold section is only reachable through a link.

    Case ``i`` has a source page that matches its query closely and whose
    first link points at a gold section sharing no word with the query.
    With ``embedder`` given, pseudo-words are resampled until the gold text
    has non-positive cosine with the query, so flat top-k cannot reach it.
    Returns ``(documents, cases)``.
    """
    rng = random.Random(seed)
    used: set[str] = set()
    docs, cases = [], []
    base = base_url.rstrip("/") + "/"
    for i in range(n_cases):
        while True:
            a, b = _pseudo_word(rng, used), _pseudo_word(rng, used)
            c, d, e = (_pseudo_word(rng, used) for _ in range(3))
            query = f"how do i configure the {a} {b} pipeline"
            gold_text = (f"Prerequisite setup\n\nSetup requires {c} {d} toolkit plus {e} "
                         "certificate installed beforehand.")
            if embedder is None:
                break
            from .embedding import cosine
            if cosine(embedder.embed(query), embedder.embed(gold_text)) <= 0:
                break
        source_url = f"{base}source-{i:03d}.html"
        gold_url = f"{base}gold-{i:03d}.html"
        source_html = render_page(f"{a.title()} {b} pipeline", [], [("overview", "Overview", [
            f"To configure the {a} {b} pipeline, first complete the "
            f"[prerequisite setup](gold-{i:03d}.html#setup) steps. The {a} {b} pipeline "
            "moves records between stages.",
        ])])
        gold_html = (
            '<!DOCTYPE html><html><body><div role="main"><section id="setup">'
            "<h1>Prerequisite setup</h1>"
            f"<p>Setup requires {c} {d} toolkit plus {e} certificate installed beforehand.</p>"
            "</section></div></body></html>"
        )
        docs.append(SourceDocument(source_url, source_html.encode("utf-8")))
        docs.append(SourceDocument(gold_url, gold_html.encode("utf-8")))
        cases.append(PlantedCase(query, gold_url, "setup", source_url))
    return docs, cases


def random_corpus(rng: random.Random, n_pages: int = 8, sections_per_page: int = 3,
                  vocabulary_size: int = 60, max_links: int = 3,
                  base_url: str = "https://random.example/") -> list[SourceDocument]:
    """Random pages with random intra-corpus links (some broken, some external)."""
    vocab = [f"w{i}" for i in range(vocabulary_size)]
    anchors = {p: [f"s{p}-{j}" for j in range(sections_per_page)] for p in range(n_pages)}
    docs = []
    for p in range(n_pages):
        sections = []
        for anchor in anchors[p]:
            paragraphs = []
            for _ in range(rng.randint(1, 3)):
                sentence = " ".join(rng.choice(vocab) for _ in range(rng.randint(5, 40)))
                for _ in range(rng.randint(0, max_links)):
                    roll = rng.random()
                    if roll < 0.7:
                        q = rng.randrange(n_pages)
                        target = f"page{q}.html#{rng.choice(anchors[q])}"
                    elif roll < 0.8:
                        target = f"page{rng.randrange(n_pages)}.html"
                    elif roll < 0.9:
                        target = f"missing{rng.randrange(5)}.html#nowhere"
                    else:
                        target = "https://elsewhere.example/page.html"
                    label = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 3)))
                    sentence += f" [{label}]({target}) " + " ".join(
                        rng.choice(vocab) for _ in range(rng.randint(0, 8)))
                paragraphs.append(sentence.strip() + ".")
            sections.append((anchor, f"Heading {anchor}", paragraphs))
        docs.append(SourceDocument(f"{base_url}page{p}.html",
                                   render_page(f"Page {p}", [], sections).encode("utf-8")))
    return docs

// Seed-1 personalities as printed: name, set values (pain, energy,
// affiliation, certainty), leakages (energy, affiliation, certainty,
// competence); team 1 then team 2.

type Row = (&'static str, [&'static str; 4], [&'static str; 4]);

const SEED1: [Row; 20] = [
    (
        "Brandom",
        [
            "0.832322710251051",
            "0.792954903009047",
            "0.800698923499392",
            "0.79635015154248",
        ],
        [
            "0.00513131392255188",
            "0.00459934507003216",
            "0.00494593232012495",
            "0.00449886894180903",
        ],
    ),
    (
        "Cornisha",
        [
            "0.856498127147759",
            "0.798857921703419",
            "0.800891525368565",
            "0.807310926345435",
        ],
        [
            "0.00504106784992906",
            "0.00492662229707347",
            "0.00575408027562202",
            "0.00511679276409423",
        ],
    ),
    (
        "Cristyn",
        [
            "0.831100524696322",
            "0.796563911665623",
            "0.809200022236316",
            "0.796765568495608",
        ],
        [
            "0.00526039934001146",
            "0.00469525040634634",
            "0.0045107889070089",
            "0.00464222987657288",
        ],
    ),
    (
        "Denica",
        [
            "0.793050211001376",
            "0.797831122688682",
            "0.808932545301169",
            "0.80344894206837",
        ],
        [
            "0.00488802358521213",
            "0.00469271668446248",
            "0.0046073922759557",
            "0.00490158980941015",
        ],
    ),
    (
        "Derwin",
        [
            "0.91101570476529",
            "0.797474283435326",
            "0.8066887096708",
            "0.800946344989395",
        ],
        [
            "0.00451827261434796",
            "0.00498592660720679",
            "0.00445752088320257",
            "0.00504084484132216",
        ],
    ),
    (
        "Deven",
        [
            "0.838068606546197",
            "0.805718655012395",
            "0.799721555785536",
            "0.792666793718805",
        ],
        [
            "0.00469997681002749",
            "0.00488313819626353",
            "0.00514698256408433",
            "0.00555297923326447",
        ],
    ),
    (
        "Herman",
        [
            "0.870946021665327",
            "0.801094975803025",
            "0.798376641905167",
            "0.794785425672169",
        ],
        [
            "0.00523322112902874",
            "0.00542665256228831",
            "0.00506181750650757",
            "0.00524011100641141",
        ],
    ),
    (
        "Jaie",
        [
            "0.86599910645479",
            "0.795886276690885",
            "0.798870127772047",
            "0.806060822180624",
        ],
        [
            "0.00432559742055996",
            "0.0055605519527752",
            "0.00500502916780431",
            "0.00529130103726344",
        ],
    ),
    (
        "Kien",
        [
            "0.860825896735131",
            "0.796193652159422",
            "0.793217745686873",
            "0.790093328980956",
        ],
        [
            "0.00479090791950936",
            "0.0046738765220001",
            "0.00474016490931056",
            "0.00482586506528426",
        ],
    ),
    (
        "Tehran",
        [
            "0.791591828039676",
            "0.797750892535971",
            "0.808123956817756",
            "0.794490945045974",
        ],
        [
            "0.00541438498501485",
            "0.0054264135425439",
            "0.00547314820852489",
            "0.00513104453458033",
        ],
    ),
    (
        "Carols",
        [
            "0.850985342280945",
            "0.795826540279336",
            "0.796339358823885",
            "0.79856189172767",
        ],
        [
            "0.00484773777330993",
            "0.00511349577696493",
            "0.00427520237511847",
            "0.00511085745561829",
        ],
    ),
    (
        "Ceaira",
        [
            "0.850107741818634",
            "0.805745045284645",
            "0.800984060347145",
            "0.796777907790234",
        ],
        [
            "0.00496202942882203",
            "0.00452811574381595",
            "0.00548720246049735",
            "0.00440840679139356",
        ],
    ),
    (
        "Ida",
        [
            "0.895180354743987",
            "0.799532992558879",
            "0.795944085035451",
            "0.799949416635265",
        ],
        [
            "0.00461041115137068",
            "0.00491362487813937",
            "0.00431521992423047",
            "0.00501723433195968",
        ],
    ),
    (
        "Jasman",
        [
            "0.885828854392381",
            "0.797966503870054",
            "0.797594004841705",
            "0.798744184153471",
        ],
        [
            "0.00498662220432355",
            "0.00474467973466491",
            "0.0052927036220236",
            "0.00502027836119064",
        ],
    ),
    (
        "Kina",
        [
            "0.853960478541093",
            "0.806012170357492",
            "0.806808961068263",
            "0.802481795780453",
        ],
        [
            "0.00450612244064935",
            "0.00515387080648576",
            "0.00486853596303127",
            "0.00525520779661425",
        ],
    ),
    (
        "Marlayna",
        [
            "0.840506831676294",
            "0.795538199346907",
            "0.801092467978905",
            "0.802168082728738",
        ],
        [
            "0.00503681551864251",
            "0.00510343091366898",
            "0.00476480610807922",
            "0.00513468004269447",
        ],
    ),
    (
        "Paulo",
        [
            "0.883117183855402",
            "0.804811080883959",
            "0.798309853982689",
            "0.811686654605819",
        ],
        [
            "0.00509178097462441",
            "0.00491471539186201",
            "0.00469687820781739",
            "0.00508371560206849",
        ],
    ),
    (
        "Stanely",
        [
            "0.855720353080281",
            "0.802309906816761",
            "0.810434925731226",
            "0.800115380739747",
        ],
        [
            "0.00485312232984306",
            "0.00478001760980506",
            "0.00490281543833036",
            "0.00501540382845146",
        ],
    ),
    (
        "Taya",
        [
            "0.86155734290407",
            "0.794659004733448",
            "0.792772651896183",
            "0.792642268612411",
        ],
        [
            "0.0046235107144188",
            "0.00460050333508733",
            "0.00548305712488281",
            "0.00549043231155397",
        ],
    ),
    (
        "Teon",
        [
            "0.833840826495436",
            "0.792112715090178",
            "0.79853501515201",
            "0.800335412980245",
        ],
        [
            "0.00497959999466033",
            "0.00482668564329631",
            "0.00478208842424309",
            "0.00448396457698363",
        ],
    ),
];

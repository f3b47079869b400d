import { StudyApi } from "./api.js";
import { RatingApp } from "./app.js";

const root = document.getElementById("app");
if (root) new RatingApp(root, new StudyApi(""));
